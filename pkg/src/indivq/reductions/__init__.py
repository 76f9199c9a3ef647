"""Executable witnesses for every reduction in the package, keyed by id."""

from .basic import (
    reduce_accstar_to_ecfc, reduce_delayed_fott2_to_fott3, reduce_rt_to_tt,
    reduce_tmin_to_lpostar_lpo,
)
from .tcn import reduce_tcn_to_rtjump, reduce_tt_to_tcn
from .fott import reduce_fott2_to_rtplus
from .ecfc import blocking_holds, reduce_ecfc_to_tt2
from .finitary import extract_finitary_from_tcnstar, rt2_via_tc, rt3_via_tc2
from .registry import REGISTRY, Entry, run_case
