"""The guessability calculus: guessers, transcripts, lifting, composition and the diagonalizer."""

from .core import (
    EVENTUALLY, FINITELY, FIXED, GuessTranscript, Guesser, Slot, audit, correct_slots,
    declare_token, decode_guess_token, final_token, open_token, run_guesser, verify_guesses,
)
from .adversary import Defeat, acc_monitor, diagonalize_accn
from .calculus import (
    Factorization, Promotion, StarInstance, compose_guessers, factor_through_cn,
    guesser_to_selector, identity_witness, inner_transcript, lift_guesser,
    promote_delayed_guesser,
)
from .library import FACTORIES, acc_target, acc_targets, get_guesser
