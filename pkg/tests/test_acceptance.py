"""Acceptance criteria, one pass/fail line each.

Run with ``pytest tests/test_acceptance.py -v`` or directly as a script.  The
thresholds below are pinned; a criterion that misses one fails rather than
being relaxed.
"""

import contextlib
import json
import sys
import tempfile
import time
from pathlib import Path

import pytest

from indivq import cli
from indivq.committree import finitary_pipeline
from indivq.families import gen_family, instance_to_json
from indivq.guessing import acc_targets
from indivq.problems import solver_for, verify_solution
from indivq.reductions import REGISTRY, run_case
from indivq.stagecore import IllegalOracleInstance, Verdict, run_inner, run_reduction

sys.path.insert(0, str(Path(__file__).resolve().parent))
from calc_checks import (  # noqa: E402
    COMPOSE_CASES, PROMOTE_CASES, compose_sweep, factor_sweep, lift_sweep, promote_sweep,
)
from test_committree import exhaustive_condensation, pipeline_checks  # noqa: E402

SUITES = Path(__file__).resolve().parent.parent / "suites"

# pinned thresholds
SOUNDNESS_SEEDS = 1000
SOUNDNESS_SECONDS = 300.0
CONDENSE_SEEDS = 300
CONDENSE_DEPTHS = (1, 2, 3, 4, 5)
MIN_TARGETS = 50
PIPELINE_RUNS = 200
CALCULUS_CASES = 500
TMIN_INSTANCES = 1000
TMIN_EMPTY = 100

_results = {}


def line(n, ok, detail, capsys=None):
    _results[n] = ok
    msg = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}"
    with capsys.disabled() if capsys is not None else contextlib.nullcontext():
        print("\n" + msg if capsys is not None else msg)
    return ok


def _files(root):
    return {p.relative_to(root).as_posix(): p.read_bytes()
            for p in sorted(Path(root).rglob("*")) if p.is_file()}


def _soundness(out):
    t = time.perf_counter()
    code = cli.main(["verify", "--suite", str(SUITES / "soundness.json"),
                     "--seed-range", f"0..{SOUNDNESS_SEEDS - 1}", "--out", str(out)])
    return code, time.perf_counter() - t


@pytest.fixture(scope="module")
def soundness_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("soundness")
    code, secs = _soundness(out)
    return out, code, secs


# -- 1 ------------------------------------------------------------------------------

def check_soundness(out, code, secs, capsys=None):
    rep = json.loads((out / "soundness-verify.json").read_text())
    summary = {t["reduction"]: t for t in rep["summary"]}
    ok = (code == 0 and sorted(summary) == sorted(REGISTRY) and len(REGISTRY) == 9
          and all(t["cases"] >= SOUNDNESS_SEEDS and t["verified"] == t["cases"]
                  for t in summary.values())
          and secs < SOUNDNESS_SECONDS)
    worst = min(t["verified"] for t in summary.values())
    return line(1, ok, f"{len(summary)} reductions x {SOUNDNESS_SEEDS} seeds, "
                       f"min verified {worst}, {secs:.1f}s (< {SOUNDNESS_SECONDS:.0f}s)", capsys)


def test_1_reduction_soundness(soundness_run, capsys):
    assert check_soundness(*soundness_run, capsys=capsys)


# -- 2 ------------------------------------------------------------------------------

def check_condensation(capsys=None):
    trees, cases, bad = exhaustive_condensation(range(CONDENSE_SEEDS), (2, 4), CONDENSE_DEPTHS)
    heights = {T.height for _, T, _ in trees}
    ok = not bad and heights == {2, 4} and cases > 0
    n4 = sum(T.height == 4 for _, T, _ in trees)
    return line(2, ok, f"{len(trees)} trees ({n4} of height 4), {cases} leaf colourings, "
                       f"{len(bad)} counterexamples", capsys)


def test_2_condensation_exhaustive(capsys):
    assert check_condensation(capsys)


# -- 3 ------------------------------------------------------------------------------

def check_tournament(capsys=None):
    gids = acc_targets()
    with tempfile.TemporaryDirectory() as d:
        code = cli.main(["tournament", "--suite", str(SUITES / "tournament.json"), "--out", d])
        rows = json.loads((Path(d) / "tournament-tournament.json").read_text())["guessers"]
    ks = {r["k"] for r in rows}
    beaten = [r for r in rows if r["verdict"] == "refuted" and r["legal"] and r["replay_matches"]
              and not r["vacuous"]]
    ok = (code == 0 and len(rows) >= MIN_TARGETS and sorted(r["guesser"] for r in rows)
          == sorted(gids) and len(beaten) == len(rows) and ks == {1, 2, 3})
    return line(3, ok, f"{len(beaten)}/{len(rows)} guessers refuted on legal instances, "
                       f"k in {sorted(ks)}", capsys)


def test_3_diagonalizer_tournament(capsys):
    assert check_tournament(capsys)


# -- 4 ------------------------------------------------------------------------------

def check_pipeline(capsys=None):
    bad, most = [], 0
    for seed in range(PIPELINE_RUNS):
        inst = gen_family({"family": "commit-pipeline", "j": 3}, seed)
        res = finitary_pipeline(inst.colouring, inst.functional, 3)
        notes = pipeline_checks(inst, res)
        tag = instance_to_json(inst)["problem"]
        if res.answer is None or verify_solution(tag, inst, [res.answer]) != Verdict.VERIFIED:
            notes.append("answer fails the first-order verifier")
        if not 0 <= (res.answer or 0) < 3:
            notes.append("answer outside the 3-element codomain")
        if inst.colouring.k != 2:
            notes.append("k != 2")
        most = max(most, len(res.trees))
        if notes:
            bad.append((seed, notes))
    ok = not bad
    return line(4, ok, f"{PIPELINE_RUNS - len(bad)}/{PIPELINE_RUNS} answers verified, "
                       f"at most {most} layered commit trees built (k = 2)", capsys)


def test_4_finitary_pipeline(capsys):
    assert check_pipeline(capsys)


# -- 5 ------------------------------------------------------------------------------

def check_counting(capsys=None):
    e = REGISTRY["tcn_le_rtjump"]
    checks = stages = bad = 0
    for seed in range(SOUNDNESS_SEEDS):
        inst = e.instance(seed)
        w = e.witness(inst)
        t = w.budget(inst)
        rep = run_reduction(w, inst, solver_for(w.oracle, e.solver_depth), t)
        # the monitor raises on the first mismatch, which surfaces as a refutation
        if rep.verdict != Verdict.VERIFIED:
            bad += 1
        checks += w.monitor.checks
        stages += t
    # and the monitor does catch a wrong count
    inst = gen_family("bounded-mind-change", 3)
    w = e.witness(inst)
    run = run_inner(w, inst, 12)
    run.state["guess"][0] += 1
    try:
        w.monitor(inst, run)
        caught = False
    except IllegalOracleInstance:
        caught = True
    ok = bad == 0 and checks > stages and caught
    return line(5, ok, f"{checks} per-point checks over {stages} stages, {bad} violations, "
                       f"tampering {'caught' if caught else 'missed'}", capsys)


def test_5_counting_identity(capsys):
    assert check_counting(capsys)


# -- 6 ------------------------------------------------------------------------------

def check_calculus(capsys=None):
    seeds = range(CALCULUS_CASES)
    parts, ok = [], True
    for rid in sorted(REGISTRY):
        bad, checked = lift_sweep(rid, seeds)
        # cases where the inner guesser already misses say nothing; top up to the quota
        extra = CALCULUS_CASES
        while checked < CALCULUS_CASES and extra < 4 * CALCULUS_CASES:
            b2, c2 = lift_sweep(rid, range(extra, extra + CALCULUS_CASES))
            bad, checked, extra = bad + b2, checked + c2, extra + CALCULUS_CASES
        ok &= not bad and checked >= CALCULUS_CASES
        parts.append(f"lift {rid} {checked}")
    for name in sorted(COMPOSE_CASES):
        bad = compose_sweep(name, seeds)
        ok &= not bad
        parts.append(f"compose {name} {len(seeds) - len(bad)}")
    for name in sorted(PROMOTE_CASES):
        bad, _ = promote_sweep(name, seeds)
        ok &= not bad
        parts.append(f"promote {name} {len(seeds) - len(bad)}")
    bad = factor_sweep(seeds)
    ok &= not bad
    parts.append(f"factor {len(seeds) - len(bad)}")
    tmin = [run_case("tmin_le_lpostar_lpo", s) for s in range(TMIN_INSTANCES)]
    empty = sum(1 for s in range(TMIN_INSTANCES)
                if not gen_family("tmin-enumeration", s).events)
    tmin_ok = sum(r.verdict == Verdict.VERIFIED for r in tmin)
    ok &= tmin_ok == TMIN_INSTANCES and empty >= TMIN_EMPTY
    parts.append(f"Tmin {tmin_ok}/{TMIN_INSTANCES} ({empty} empty)")
    return line(6, ok, "; ".join(parts), capsys)


def test_6_guesser_calculus(capsys):
    assert check_calculus(capsys)


# -- 7 ------------------------------------------------------------------------------

def check_determinism(first_soundness, capsys=None):
    runs = [
        ["verify", "--suite", str(SUITES / "smoke.json")],
        ["tournament", "--suite", str(SUITES / "tournament.json")],
        ["audit-committree", "--suite", str(SUITES / "committree.json")],
        ["gen-corpus", "--suite", str(SUITES / "corpus.json")],
    ]
    same, total = 0, 0
    with tempfile.TemporaryDirectory() as d:
        for i, argv in enumerate(runs):
            a, b, c = (Path(d) / f"{i}{x}" for x in "abc")
            cli.main(argv + ["--out", str(a)])
            cli.main(argv + ["--out", str(b)])
            cli.main(argv + ["--out", str(c), "--jobs", "2"])
            total += 1
            same += _files(a) == _files(b) == _files(c) and bool(_files(a))
        again = Path(d) / "soundness"
        _soundness(again)
        total += 1
        same += _files(again) == _files(first_soundness)
    return line(7, same == total, f"{same}/{total} suites byte-identical on rerun "
                                  f"(and across --jobs 1/2)", capsys)


def test_7_determinism(soundness_run, capsys):
    assert check_determinism(soundness_run[0], capsys)


if __name__ == "__main__":
    with tempfile.TemporaryDirectory() as d:
        out = Path(d)
        code, secs = _soundness(out)
        check_soundness(out, code, secs)
        check_condensation()
        check_tournament()
        check_pipeline()
        check_counting()
        check_calculus()
        check_determinism(out)
    sys.exit(0 if all(_results.values()) else 1)
