"""Secure placement delivery arrays: construction, validation and a bit-exact scheme simulator."""

from .combinatorics import (
    ParallelClassPartition,
    baranyai_partition,
    rank_subset,
    round_robin_factorization,
    unrank_subset,
    validate_partition,
)
from .constructions import (
    Case,
    ConstructionCase,
    base_array_q,
    construct_auto,
    construct_case2,
    construct_case3,
    construct_optimal,
    predict_params,
)
from .core import (
    STAR,
    InvalidSpdaError,
    SchemeParams,
    SpdaArray,
    derive_params,
    is_optimal,
    lower_bound_s,
    rate_lower_bound,
    read_spda,
    validate_spda,
    write_spda,
)

__all__ = [
    "STAR",
    "Case",
    "ConstructionCase",
    "InvalidSpdaError",
    "ParallelClassPartition",
    "SchemeParams",
    "SpdaArray",
    "base_array_q",
    "baranyai_partition",
    "construct_auto",
    "construct_case2",
    "construct_case3",
    "construct_optimal",
    "derive_params",
    "is_optimal",
    "lower_bound_s",
    "predict_params",
    "rank_subset",
    "rate_lower_bound",
    "read_spda",
    "round_robin_factorization",
    "unrank_subset",
    "validate_partition",
    "validate_spda",
    "write_spda",
]
