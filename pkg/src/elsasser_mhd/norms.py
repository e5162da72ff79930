"""Lebesgue and homogeneous Sobolev norms, and the per-run monitor series."""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace

import numpy as np

from .fields import ElsasserState, FluidParams
from .spectral import PhysicalVectorField, SpectralVectorField, divergence_max, to_physical

__all__ = [
    "OrderingError",
    "lp_norm",
    "hs_norm",
    "hs_norm_sq",
    "MonitorRow",
    "MonitorSeries",
    "CSV_COLUMNS",
    "record_monitors",
]

VOLUME = (2.0 * np.pi) ** 3

CSV_COLUMNS = (
    "t",
    "l3_wp",
    "l3_wm",
    "h12_wp",
    "h12_wm",
    "h32_wp_sq_int",
    "h32_wm_sq_int",
    "l9_wp_cubed_int",
    "energy_u",
    "energy_b",
    "a_minus_l3",
    "a_minus_h12",
    "div_max",
)


class OrderingError(ValueError):
    pass


def lp_norm(f: PhysicalVectorField, p: float) -> float:
    """Quadrature L^p norm of the pointwise Euclidean magnitude."""
    if not p >= 1:
        raise ValueError(f"p must be >= 1, got {p!r}")
    mag = f.magnitude()
    if math.isinf(p):
        return float(np.max(mag))
    # factor out the maximum so large p does not overflow
    top = float(np.max(mag))
    if top == 0.0:
        return 0.0
    return top * float(np.sum((mag / top) ** p) * f.grid.cell_volume) ** (1.0 / p)


def hs_norm_sq(g: SpectralVectorField, s: float) -> float:
    """Square of :func:`hs_norm`."""
    grid = g.grid
    power = np.abs(g.coeffs[0]) ** 2 + np.abs(g.coeffs[1]) ** 2 + np.abs(g.coeffs[2]) ** 2
    if s == 0:
        weight = grid.half_weights
    else:
        if s < 0 and np.any(g.mean != 0):
            raise ValueError("homogeneous norm of negative order needs a mean-zero field")
        k2 = grid.k_squared
        with np.errstate(divide="ignore"):
            weight = grid.half_weights * np.where(k2 == 0, 0.0, k2**s)
    return VOLUME * float(np.sum(weight * power))


def hs_norm(g: SpectralVectorField, s: float) -> float:
    """Homogeneous Sobolev norm ``((2 pi)^3 sum_k |k|^(2s) |coeffs(k)|^2)^(1/2)``."""
    return math.sqrt(hs_norm_sq(g, s))


@dataclass(frozen=True)
class MonitorRow:
    t: float
    l3_wp: float
    l3_wm: float
    h12_wp: float
    h12_wm: float
    h32_wp_sq_int: float
    h32_wm_sq_int: float
    l9_wp_cubed_int: float
    energy_u: float
    energy_b: float
    a_minus_l3: float
    a_minus_h12: float
    div_max: float
    # instantaneous values backing the running integrals; not part of the CSV
    h32_wp_sq: float = math.nan
    h32_wm_sq: float = math.nan
    l9_wp_cubed: float = math.nan
    dissipation: float = math.nan
    dissipation_int: float = math.nan
    sup_l3_wm: float = math.nan
    sup_h12_wm_sq: float = math.nan

    def csv_values(self) -> tuple[float, ...]:
        return tuple(getattr(self, c) for c in CSV_COLUMNS)

    def is_finite(self) -> bool:
        return all(math.isfinite(v) for v in self.csv_values())


@dataclass(frozen=True)
class MonitorSeries:
    params: FluidParams
    rows: tuple[MonitorRow, ...] = ()
    config_digest: str = ""

    def __len__(self):
        return len(self.rows)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows])

    @property
    def last(self) -> MonitorRow | None:
        return self.rows[-1] if self.rows else None


def _trapezoid(prev: float, cur: float, dt: float) -> float:
    return 0.5 * (prev + cur) * dt


def record_monitors(
    e: ElsasserState,
    params: FluidParams,
    prev: MonitorSeries,
    physical: tuple[PhysicalVectorField, PhysicalVectorField] | None = None,
) -> MonitorSeries:
    """Append a row for state ``e`` to ``prev`` and return the new series.

    Running integrals are advanced with the trapezoidal rule.  ``physical``
    may carry already-computed physical-space ``(W+, W-)`` to skip two
    inverse transforms.
    """
    last = prev.last
    if last is not None and not e.time > last.t:
        raise OrderingError(f"monitor time {e.time} does not advance past {last.t}")
    if physical is None:
        physical = (to_physical(e.w_plus), to_physical(e.w_minus))
    wp_phys, wm_phys = physical
    kappa = params.kappa

    l3_wp = lp_norm(wp_phys, 3.0)
    l3_wm = lp_norm(wm_phys, 3.0)
    l9_wp = lp_norm(wp_phys, 9.0)
    h12_wp_sq = hs_norm_sq(e.w_plus, 0.5)
    h12_wm_sq = hs_norm_sq(e.w_minus, 0.5)
    h32_wp_sq = hs_norm_sq(e.w_plus, 1.5)
    h32_wm_sq = hs_norm_sq(e.w_minus, 1.5)

    u = 0.5 * (e.w_plus.coeffs + e.w_minus.coeffs)
    b = 0.5 * (e.w_plus.coeffs - e.w_minus.coeffs)
    grid = e.grid
    u_f = SpectralVectorField(grid, u)
    b_f = SpectralVectorField(grid, b)
    energy_u = 0.5 * hs_norm_sq(u_f, 0.0)
    energy_b = 0.5 * hs_norm_sq(b_f, 0.0)
    dissipation = hs_norm_sq(u_f, 1.0) / params.re + hs_norm_sq(b_f, 1.0) / params.rm

    if last is None:
        h32_wp_int = h32_wm_int = l9_int = diss_int = 0.0
        sup_l3 = l3_wm
        sup_h12 = h12_wm_sq
    else:
        dt = e.time - last.t
        h32_wp_int = last.h32_wp_sq_int + _trapezoid(last.h32_wp_sq, h32_wp_sq, dt)
        h32_wm_int = last.h32_wm_sq_int + _trapezoid(last.h32_wm_sq, h32_wm_sq, dt)
        l9_int = last.l9_wp_cubed_int + _trapezoid(last.l9_wp_cubed, l9_wp**3, dt)
        diss_int = last.dissipation_int + _trapezoid(last.dissipation, dissipation, dt)
        sup_l3 = max(last.sup_l3_wm, l3_wm)
        sup_h12 = max(last.sup_h12_wm_sq, h12_wm_sq)

    row = MonitorRow(
        t=float(e.time),
        l3_wp=l3_wp,
        l3_wm=l3_wm,
        h12_wp=math.sqrt(h12_wp_sq),
        h12_wm=math.sqrt(h12_wm_sq),
        h32_wp_sq_int=h32_wp_int,
        h32_wm_sq_int=h32_wm_int,
        l9_wp_cubed_int=l9_int,
        energy_u=energy_u,
        energy_b=energy_b,
        a_minus_l3=sup_l3**3 / kappa**3,
        a_minus_h12=sup_h12 / kappa**2 + h32_wm_int / kappa,
        div_max=max(divergence_max(e.w_plus), divergence_max(e.w_minus)),
        h32_wp_sq=h32_wp_sq,
        h32_wm_sq=h32_wm_sq,
        l9_wp_cubed=l9_wp**3,
        dissipation=dissipation,
        dissipation_int=diss_int,
        sup_l3_wm=sup_l3,
        sup_h12_wm_sq=sup_h12,
    )
    return replace(prev, rows=prev.rows + (row,))


def row_from_csv(values: dict[str, float]) -> MonitorRow:
    """Rebuild a row from the 13 serialized columns; the extras stay NaN."""
    names = {f.name for f in fields(MonitorRow)}
    return MonitorRow(**{k: float(v) for k, v in values.items() if k in names})
