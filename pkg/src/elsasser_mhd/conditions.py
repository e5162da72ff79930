"""Smallness conditions for global existence of strong solutions.

Two families are evaluated for Elsasser initial data ``(W+_0, W-_0)``:

* the ``L^3`` conditions (equal Reynolds numbers, ``lambda = 0``)::

      kappa^-3 |W-_0|_3^3 * exp(C0 kappa^-3 |W+_0|_3^3) < eps0       (variant "2.1")

* the ``H^{1/2}`` conditions for general ``lambda``::

      (kappa^-2 |W-_0|^2 + r^2 (kappa^-2 |W+_0|^2 + r^2))
          * exp(C0 (kappa^-4 |W+_0|^4 + r^4)) < eps0                 (variant "2.7")

  with ``r = |lambda| / kappa``.

Variants "2.2" and "2.8" exchange the roles of ``W+_0`` and ``W-_0``.
``eps0`` and ``C0`` are never quantified by the theory; they are user
calibration knobs with defaults ``0.01`` and ``1``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from .fields import ElsasserState, FluidParams
from .norms import hs_norm, lp_norm
from .spectral import to_physical

__all__ = [
    "ConditionParams",
    "ConditionReport",
    "thm1_lhs",
    "thm2_lhs",
    "evaluate_thm1",
    "evaluate_thm2",
    "evaluate_thm1_from_norms",
    "evaluate_thm2_from_norms",
    "evaluate_all",
]

THM1_VARIANTS = {"2.1": "thm1-2.1", "2.2": "thm1-2.2"}
THM2_VARIANTS = {"2.7": "thm2-2.7", "2.8": "thm2-2.8"}


@dataclass(frozen=True)
class ConditionParams:
    epsilon0: float = 0.01
    c0: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.epsilon0 < 0.5:
            raise ValueError(f"epsilon0 must lie in (0, 1/2), got {self.epsilon0!r}")
        if not (self.c0 > 0 and math.isfinite(self.c0)):
            raise ValueError(f"c0 must be > 0, got {self.c0!r}")


@dataclass(frozen=True)
class ConditionReport:
    which: str
    lhs: float
    epsilon0: float
    holds: bool
    lambda_kappa_ratio: float
    implied_ratio_bound: float
    hypothesis_ok: bool = True

    def to_dict(self) -> dict:
        return asdict(self)


def _prefactor_times_exp(prefactor: float, exponent: float) -> float:
    # prefactor * exp(exponent) without 0 * inf = nan
    if prefactor == 0.0:
        return 0.0
    try:
        return math.exp(math.log(prefactor) + exponent)
    except OverflowError:
        return math.inf


def thm1_lhs(kappa: float, small_l3: float, large_l3: float, c0: float) -> float:
    """``kappa^-3 small^3 * exp(c0 kappa^-3 large^3)``."""
    return _prefactor_times_exp(small_l3**3 / kappa**3, c0 * large_l3**3 / kappa**3)


def thm2_lhs(kappa: float, lam: float, small_h12: float, large_h12: float, c0: float) -> float:
    r2 = (lam / kappa) ** 2
    big2 = large_h12**2 / kappa**2
    prefactor = small_h12**2 / kappa**2 + r2 * (big2 + r2)
    return _prefactor_times_exp(prefactor, c0 * (big2**2 + r2**2))


def evaluate_thm1_from_norms(
    params: FluidParams, l3_wp: float, l3_wm: float, cp: ConditionParams, variant: str = "2.1"
) -> ConditionReport:
    if variant not in THM1_VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    small, large = (l3_wm, l3_wp) if variant == "2.1" else (l3_wp, l3_wm)
    lhs = thm1_lhs(params.kappa, small, large, cp.c0)
    return ConditionReport(
        which=THM1_VARIANTS[variant],
        lhs=lhs,
        epsilon0=cp.epsilon0,
        holds=lhs < cp.epsilon0,
        lambda_kappa_ratio=params.lambda_kappa_ratio,
        implied_ratio_bound=cp.epsilon0**0.25,
        # these conditions presuppose equal Reynolds numbers
        hypothesis_ok=params.lam == 0.0,
    )


def evaluate_thm2_from_norms(
    params: FluidParams, h12_wp: float, h12_wm: float, cp: ConditionParams, variant: str = "2.7"
) -> ConditionReport:
    if variant not in THM2_VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    small, large = (h12_wm, h12_wp) if variant == "2.7" else (h12_wp, h12_wm)
    lhs = thm2_lhs(params.kappa, params.lam, small, large, cp.c0)
    return ConditionReport(
        which=THM2_VARIANTS[variant],
        lhs=lhs,
        epsilon0=cp.epsilon0,
        holds=lhs < cp.epsilon0,
        lambda_kappa_ratio=params.lambda_kappa_ratio,
        implied_ratio_bound=cp.epsilon0**0.25,
    )


def evaluate_thm1(
    params: FluidParams, w0: ElsasserState, cp: ConditionParams, variant: str = "2.1"
) -> ConditionReport:
    l3_wp = lp_norm(to_physical(w0.w_plus), 3.0)
    l3_wm = lp_norm(to_physical(w0.w_minus), 3.0)
    return evaluate_thm1_from_norms(params, l3_wp, l3_wm, cp, variant)


def evaluate_thm2(
    params: FluidParams, w0: ElsasserState, cp: ConditionParams, variant: str = "2.7"
) -> ConditionReport:
    return evaluate_thm2_from_norms(
        params, hs_norm(w0.w_plus, 0.5), hs_norm(w0.w_minus, 0.5), cp, variant
    )


def evaluate_all(params: FluidParams, w0: ElsasserState, cp: ConditionParams) -> list[ConditionReport]:
    """All four conditions, in the order 2.1, 2.2, 2.7, 2.8."""
    l3_wp = lp_norm(to_physical(w0.w_plus), 3.0)
    l3_wm = lp_norm(to_physical(w0.w_minus), 3.0)
    h_wp = hs_norm(w0.w_plus, 0.5)
    h_wm = hs_norm(w0.w_minus, 0.5)
    return [
        evaluate_thm1_from_norms(params, l3_wp, l3_wm, cp, "2.1"),
        evaluate_thm1_from_norms(params, l3_wp, l3_wm, cp, "2.2"),
        evaluate_thm2_from_norms(params, h_wp, h_wm, cp, "2.7"),
        evaluate_thm2_from_norms(params, h_wp, h_wm, cp, "2.8"),
    ]
