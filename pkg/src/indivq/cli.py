"""Batch runner: corpus generation, reduction suites, guesser tournaments, commit-tree audits.

Every verb writes a full JSON report and a CSV summary under ``--out``.
Reports carry no timings or paths, so identical configurations give
identical bytes.  The exit status is 0 iff no case was refuted and nothing
went wrong.

Usage::

    python -m indivq.cli verify --suite suites/soundness.json --jobs 4
    python -m indivq.cli verify --seed-range 0..99 --out reports
    python -m indivq.cli tournament --suite suites/tournament.json
    python -m indivq.cli gen-corpus --family constant --seed-range 0..4 --out corpus
    python -m indivq.cli audit-committree --seed-range 0..199
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

from .committree import finitary_pipeline, selection_extendible, validate
from .families import FAMILIES, dumps, gen_family, instance_to_json, write_corpus
from .guessing import (
    FACTORIES, FIXED, acc_monitor, diagonalize_accn, get_guesser, run_guesser, verify_guesses,
)
from .reductions import REGISTRY, run_case


class UsageError(ValueError):
    pass


def parse_seed_range(text: str) -> tuple[int, int]:
    """``"a..b"`` (inclusive) or a single seed."""
    try:
        if ".." in text:
            a, b = (int(x) for x in text.split("..", 1))
        else:
            a = b = int(text)
    except ValueError:
        raise UsageError(f"bad seed range {text!r}; expected a..b") from None
    if a < 0 or b < a:
        raise UsageError(f"empty seed range {text!r}")
    return a, b


@dataclass
class SuiteConfig:
    id: str = "default"
    reductions: list = field(default_factory=list)
    guessers: list = field(default_factory=list)
    families: dict = field(default_factory=dict)
    seeds: tuple = (0, 99)
    budget: Optional[int] = None
    out: str = "reports"
    jobs: int = 1

    @classmethod
    def from_file(cls, path) -> "SuiteConfig":
        try:
            raw = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read suite {path}: {exc}") from None
        known = {"id", "reductions", "guessers", "families", "seeds", "budget", "out", "jobs"}
        extra = set(raw) - known
        if extra:
            raise UsageError(f"unknown suite keys {sorted(extra)}")
        cfg = cls(**{k: v for k, v in raw.items() if k != "seeds"})
        if "seeds" in raw:
            s = raw["seeds"]
            cfg.seeds = parse_seed_range(s) if isinstance(s, str) else tuple(s)
        return cfg

    def seed_list(self) -> range:
        a, b = self.seeds
        if b < a:
            raise UsageError(f"empty seed range {a}..{b}")
        return range(a, b + 1)

    def check(self, verb: str):
        self.seed_list()
        for rid in self.reductions:
            if rid not in REGISTRY:
                raise UsageError(f"unknown reduction {rid!r}")
        for gid in self.guessers:
            if gid not in FACTORIES:
                raise UsageError(f"unknown guesser {gid!r}")
        for key, desc in self.families.items():
            name = desc.get("family") if isinstance(desc, dict) else desc
            if name not in FAMILIES:
                raise UsageError(f"unknown family {name!r} for {key!r}")
        if verb == "verify" and not self.reductions:
            self.reductions = sorted(REGISTRY)
        if verb == "tournament":
            for gid in self.guessers:
                if get_guesser(gid).flavor != FIXED:
                    raise UsageError(f"tournament guesser {gid!r} is not a fixed k-guesser")

    def to_json(self) -> dict:
        return {"id": self.id, "reductions": list(self.reductions),
                "guessers": list(self.guessers), "families": self.families,
                "seeds": list(self.seeds), "budget": self.budget}


# -- per-case workers (module level so they pickle) -------------------------------

def _verify_case(args) -> dict:
    rid, seed, budget, desc = args
    inst = gen_family(desc, seed) if desc is not None else None
    try:
        rep = run_case(rid, seed, budget=budget, inst=inst)
        verdict, diag, stages, out = rep.verdict.value, rep.diagnostic, rep.stages_run, len(rep.output)
    except Exception as exc:  # reported as a row, flips the exit status
        verdict, diag, stages, out = "error", f"{type(exc).__name__}: {exc}", 0, 0
    return {"case": f"{rid}/{seed:06d}", "reduction": rid, "seed": seed, "verdict": verdict,
            "stages": stages, "output_tokens": out, "diagnostic": diag}


def _tournament_case(args) -> dict:
    gid, budget = args
    g = get_guesser(gid)
    defeat = diagonalize_accn(g, g.k, budget)
    inst = defeat.instance
    horizon = len(inst.name(0)) + budget + len(inst.schedule) + 1
    replay = run_guesser(g, inst, budget)
    verdict = verify_guesses(g.problem, inst, replay)
    return {"case": gid, "guesser": gid, "k": g.k, "stages": defeat.stages,
            "vacuous": defeat.vacuous, "finalized": len(defeat.transcript.finalized()),
            "instance_id": f"acc-defeat/{gid}",
            "instance": instance_to_json(inst, "acc-defeat", 0),
            "legal": not acc_monitor(inst, horizon),
            "replay_matches": replay.to_json() == defeat.transcript.to_json(),
            "verdict": verdict.value, "transcript": defeat.transcript.to_json()}


def _audit_case(args) -> dict:
    seed, desc = args
    inst = gen_family(desc, seed)
    j = desc.get("j", 3)
    res = finitary_pipeline(inst.colouring, inst.functional, j)
    faults = [f for T in res.trees for f in validate(T, inst.colouring, inst.functional)]
    consistent = all(res.trees[i + 1].answers()[:len(res.trees[i].layers)]
                     == res.trees[i].answers() for i in range(len(res.trees) - 1))
    ext = res.selection is not None and selection_extendible(res.trees[-1], res.selection,
                                                             inst.colouring)
    return {"case": f"{desc['family']}/{seed:06d}", "seed": seed,
            "verdict": res.verdict.value, "answer": res.answer,
            "trees_built": len(res.trees), "k": inst.k, "valid": not faults,
            "consistent": consistent, "extendible": ext, "faults": faults[:5],
            "audit": res.to_json(), "instance": instance_to_json(inst, desc["family"], seed)}


def _map(fn: Callable, jobs: list, n: int) -> list:
    if n <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, jobs, chunksize=max(1, len(jobs) // (4 * n))))


# -- report writing ----------------------------------------------------------------

def _write(out: Path, stem: str, report: dict, columns: list[str], rows: list[dict]) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / f"{stem}.json").write_text(json.dumps(report, sort_keys=True, indent=1) + "\n")
    buf = io.StringIO()
    w = csv.DictWriter(buf, columns, extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    (out / f"{stem}.csv").write_text(buf.getvalue())


def _tally(rows: list[dict], key: str) -> list[dict]:
    out: dict = {}
    for r in rows:
        t = out.setdefault(r[key], {key: r[key], "cases": 0, "verified": 0, "refuted": 0,
                                    "undecided-at-budget": 0, "error": 0})
        t["cases"] += 1
        t[r["verdict"]] += 1
    return [out[k] for k in sorted(out)]


def cmd_verify(cfg: SuiteConfig) -> int:
    jobs = [(rid, s, cfg.budget, cfg.families.get(rid)) for rid in cfg.reductions
            for s in cfg.seed_list()]
    rows = sorted(_map(_verify_case, jobs, cfg.jobs), key=lambda r: r["case"])
    summary = _tally(rows, "reduction")
    _write(Path(cfg.out), f"{cfg.id}-verify",
           {"verb": "verify", "config": cfg.to_json(), "summary": summary, "cases": rows},
           ["reduction", "cases", "verified", "refuted", "undecided-at-budget", "error"], summary)
    bad = sum(t["refuted"] + t["error"] for t in summary)
    print(f"verify {cfg.id}: {len(rows)} cases, {bad} refuted or failed")
    return 1 if bad else 0


def cmd_tournament(cfg: SuiteConfig) -> int:
    budget = cfg.budget or 64
    rows = sorted(_map(_tournament_case, [(g, budget) for g in cfg.guessers], cfg.jobs),
                  key=lambda r: r["case"])
    _write(Path(cfg.out), f"{cfg.id}-tournament",
           {"verb": "tournament", "config": cfg.to_json(), "guessers": rows},
           ["guesser", "k", "stages", "finalized", "vacuous", "legal", "replay_matches",
            "verdict", "instance_id"], rows)
    # a tournament fails when some guesser survives or the adversary cheats
    bad = [r["guesser"] for r in rows
           if r["verdict"] != "refuted" or not r["legal"] or not r["replay_matches"]]
    print(f"tournament {cfg.id}: {len(rows)} guessers, {len(rows) - len(bad)} defeated")
    return 1 if bad else 0


def cmd_gen_corpus(cfg: SuiteConfig) -> int:
    if not cfg.families:
        raise UsageError("gen-corpus needs --family or a suite with families")
    total = 0
    for key in sorted(cfg.families):
        total += len(write_corpus(cfg.families[key], cfg.seed_list(), cfg.out, name=key))
    print(f"gen-corpus: {total} files under {cfg.out}")
    return 0


def cmd_audit_committree(cfg: SuiteConfig) -> int:
    desc = cfg.families.get("committree", {"family": "commit-pipeline"})
    if isinstance(desc, str):
        desc = {"family": desc}
    rows = sorted(_map(_audit_case, [(s, desc) for s in cfg.seed_list()], cfg.jobs),
                  key=lambda r: r["case"])
    out = Path(cfg.out)
    audits = out / f"{cfg.id}-committree"
    audits.mkdir(parents=True, exist_ok=True)
    for r in rows:
        (audits / f"{r['seed']}.json").write_text(dumps({"audit": r.pop("audit"),
                                                        "instance": r.pop("instance")}) + "\n")
    summary = {"cases": len(rows), "verified": sum(r["verdict"] == "verified" for r in rows),
               "max_trees_built": max((r["trees_built"] for r in rows), default=0)}
    _write(out, f"{cfg.id}-committree",
           {"verb": "audit-committree", "config": cfg.to_json(), "summary": summary,
            "cases": rows},
           ["case", "seed", "verdict", "answer", "trees_built", "valid", "consistent",
            "extendible"], rows)
    bad = [r for r in rows if r["verdict"] == "refuted" or not r["valid"]
           or not r["consistent"] or r["trees_built"] > r["k"]]
    print(f"audit-committree {cfg.id}: {summary['verified']}/{len(rows)} verified, "
          f"at most {summary['max_trees_built']} trees built")
    return 1 if bad else 0


VERBS = {"verify": cmd_verify, "tournament": cmd_tournament, "gen-corpus": cmd_gen_corpus,
         "audit-committree": cmd_audit_committree}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="indivq", description=__doc__.splitlines()[0])
    p.add_argument("verb", choices=sorted(VERBS))
    p.add_argument("--suite", help="JSON suite file")
    p.add_argument("--seed-range", help="inclusive seed range a..b")
    p.add_argument("--budget", type=int, help="stage budget (default: per reduction)")
    p.add_argument("--out", help="output directory")
    p.add_argument("--jobs", type=int, help="worker processes")
    p.add_argument("--family", help="family name or JSON descriptor (gen-corpus)")
    return p


def config_from_args(args) -> SuiteConfig:
    cfg = SuiteConfig.from_file(args.suite) if args.suite else SuiteConfig()
    if args.seed_range:
        cfg.seeds = parse_seed_range(args.seed_range)
    if args.budget is not None:
        if args.budget <= 0:
            raise UsageError("--budget must be positive")
        cfg.budget = args.budget
    if args.out:
        cfg.out = args.out
    elif args.verb == "gen-corpus" and not args.suite:
        cfg.out = "corpus"
    if args.jobs is not None:
        cfg.jobs = args.jobs
    if args.family:
        try:
            desc = json.loads(args.family) if args.family.lstrip().startswith("{") else args.family
        except json.JSONDecodeError as exc:
            raise UsageError(f"bad family descriptor: {exc}") from None
        name = desc if isinstance(desc, str) else desc.get("family", "")
        cfg.families = {name: desc}
    cfg.check(args.verb)
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        return VERBS[args.verb](cfg)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"indivq: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
