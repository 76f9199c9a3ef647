"""
Defeating a k-guesser
=====================

A k-guesser for all-or-co-unique choice commits to k guesses.  The
adversary keeps the instance neutral until a guess is final and then
removes exactly the guessed number, so every guess ends up wrong.
"""

from indivq.guessing import acc_monitor, acc_targets, diagonalize_accn, get_guesser, verify_guesses

g = get_guesser("acc-random-k2-p1")
defeat = diagonalize_accn(g, g.k, 64)

# the guesser's slots, with their final values
for slot in defeat.transcript.to_json()["slots"]:
    print(slot)

# the removals the adversary scheduled in response
print("schedule:", defeat.instance.schedule)
print("verdict:", verify_guesses(g.problem, defeat.instance, defeat.transcript).value)
print("legal:", not acc_monitor(defeat.instance, 200))

# the whole registered corpus
beaten = 0
for gid in acc_targets():
    t = get_guesser(gid)
    d = diagonalize_accn(t, t.k, 64)
    beaten += verify_guesses(t.problem, d.instance, d.transcript).value == "refuted"
print(f"{beaten}/{len(acc_targets())} guessers defeated")
