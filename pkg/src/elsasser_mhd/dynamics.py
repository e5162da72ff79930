"""Time integration of the Elsasser system.

Per Fourier mode the linear part couples ``W+`` and ``W-`` through the matrix
``[[kappa, lam], [lam, kappa]] |k|^2``.  Its eigenvectors are ``u = (W+ + W-)/2``
and ``B = (W+ - W-)/2`` with eigenvalues ``1/re`` and ``1/rm``, so the
diffusion propagator is applied exactly.  The cross-advection
``-(W-.grad)W+``, ``-(W+.grad)W-`` is evaluated pseudo-spectrally in
divergence form, dealiased with the 2/3 rule and Leray-projected (which
removes the pressure gradient), then advanced with integrating-factor Heun.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .conditions import ConditionParams, ConditionReport, evaluate_all
from .fields import ElsasserState, FluidParams
from .norms import MonitorSeries, record_monitors
from .spectral import (
    PhysicalVectorField,
    ScalarSpectralField,
    SpectralVectorField,
    _irfft,
    _rfft,
    dealias_two_thirds,
    leray_project,
)

__all__ = [
    "IntegratorConfig",
    "RunResult",
    "BlowupDetected",
    "CflViolation",
    "advection",
    "nonlinear_term",
    "diffusion_step",
    "step",
    "recover_pressure",
    "simulate",
    "COMPLETED",
    "BLOWUP",
    "CFL_VIOLATION",
]

log = logging.getLogger(__name__)

COMPLETED = "completed"
BLOWUP = "blowup-detected"
CFL_VIOLATION = "cfl-violation"


class BlowupDetected(RuntimeError):
    pass


class CflViolation(RuntimeError):
    pass


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float = 1e-3
    t_end: float = 1.0
    cfl_safety: float = 0.5
    blowup_threshold: float = 1e6
    monitor_every: int = 1

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ValueError(f"dt must be > 0, got {self.dt!r}")
        if not (self.t_end >= 0 and math.isfinite(self.t_end)):
            raise ValueError(f"t_end must be >= 0, got {self.t_end!r}")
        if not 0 < self.cfl_safety <= 1:
            raise ValueError(f"cfl_safety must lie in (0, 1], got {self.cfl_safety!r}")
        if not self.blowup_threshold > 0:
            raise ValueError(f"blowup_threshold must be > 0, got {self.blowup_threshold!r}")
        if not (isinstance(self.monitor_every, int) and self.monitor_every >= 1):
            raise ValueError(f"monitor_every must be an integer >= 1, got {self.monitor_every!r}")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))


@dataclass(frozen=True, eq=False)
class RunResult:
    final: ElsasserState
    series: MonitorSeries
    status: str
    steps_taken: int
    conditions: list[ConditionReport] = field(default_factory=list)


def _product_tensor(a: np.ndarray, b: np.ndarray, n: int) -> np.ndarray:
    """Spectral coefficients of ``a_j b_i`` indexed ``[j, i]``, dealiased."""
    prod = a[:, None] * b[None, :]
    spec = _rfft(prod.reshape((9,) + prod.shape[2:]), n)
    return spec.reshape((3, 3) + spec.shape[1:])


def _divergence_rows(t_hat: np.ndarray, k: np.ndarray) -> np.ndarray:
    # sum_j i k_j T[j, i]
    return 1j * np.einsum("j...,ji...->i...", k, t_hat)


@dataclass(frozen=True, eq=False)
class _Evaluation:
    n_plus: SpectralVectorField
    n_minus: SpectralVectorField
    physical: tuple[PhysicalVectorField, PhysicalVectorField]
    max_speed: float


def _evaluate(e: ElsasserState) -> _Evaluation:
    grid = e.grid
    n = grid.n
    mask = grid.dealias_mask
    wp = _irfft(e.w_plus.coeffs * mask, n)
    wm = _irfft(e.w_minus.coeffs * mask, n)
    if not (np.all(np.isfinite(wp)) and np.all(np.isfinite(wm))):
        raise BlowupDetected("non-finite field in nonlinear evaluation")
    # T[j, i] = W-_j W+_i ; (W-.grad)W+ = div_j T[j, :], (W+.grad)W- = div_j T[:, j]
    t_hat = _product_tensor(wm, wp, n) * mask
    k = grid.wavenumbers
    adv_plus = _divergence_rows(t_hat, k)
    adv_minus = _divergence_rows(np.swapaxes(t_hat, 0, 1), k)
    n_plus = leray_project(SpectralVectorField(grid, -adv_plus))
    n_minus = leray_project(SpectralVectorField(grid, -adv_minus))
    speed = math.sqrt(max(float(np.max(np.sum(wp**2, axis=0))), float(np.max(np.sum(wm**2, axis=0)))))
    return _Evaluation(
        n_plus,
        n_minus,
        (PhysicalVectorField(grid, wp), PhysicalVectorField(grid, wm)),
        speed,
    )


def advection(a: SpectralVectorField, b: SpectralVectorField) -> SpectralVectorField:
    """Dealiased spectral form of ``(a . grad) b`` for solenoidal ``a``, before projection."""
    grid = a.grid
    n = grid.n
    mask = grid.dealias_mask
    pa = _irfft(a.coeffs * mask, n)
    pb = _irfft(b.coeffs * mask, n)
    t_hat = _product_tensor(pa, pb, n) * mask
    return SpectralVectorField(grid, _divergence_rows(t_hat, grid.wavenumbers))


def nonlinear_term(e: ElsasserState) -> tuple[SpectralVectorField, SpectralVectorField]:
    """Projected, dealiased ``-(W-.grad)W+`` and ``-(W+.grad)W-``."""
    ev = _evaluate(e)
    return ev.n_plus, ev.n_minus


def _diffusion_factors(grid, params: FluidParams, dt: float) -> tuple[np.ndarray, np.ndarray]:
    k2 = grid.k_squared
    a = np.exp(-k2 * dt / params.re)
    b = np.exp(-k2 * dt / params.rm)
    return 0.5 * (a + b), 0.5 * (a - b)


def _apply_diffusion(wp: np.ndarray, wm: np.ndarray, factors) -> tuple[np.ndarray, np.ndarray]:
    same, cross = factors
    return same * wp + cross * wm, cross * wp + same * wm


def diffusion_step(e: ElsasserState, params: FluidParams, dt: float) -> ElsasserState:
    """Exact solution of the coupled linear diffusion over ``dt``."""
    if dt < 0:
        raise ValueError("dt must be >= 0")
    if dt == 0:
        return ElsasserState(e.w_plus, e.w_minus, e.time)
    factors = _diffusion_factors(e.grid, params, dt)
    wp, wm = _apply_diffusion(e.w_plus.coeffs, e.w_minus.coeffs, factors)
    grid = e.grid
    return ElsasserState(SpectralVectorField(grid, wp), SpectralVectorField(grid, wm), e.time + dt)


class _Stepper:
    """Integrating-factor Heun with cached diffusion factors.

    With ``E = exp(L dt)`` and ``N`` the projected nonlinearity::

        w* = E (w + dt N(w))
        w1 = E (w + dt/2 N(w)) + dt/2 N(w*)
    """

    def __init__(self, grid, params: FluidParams, cfg: IntegratorConfig):
        self.grid = grid
        self.params = params
        self.cfg = cfg
        self.factors = _diffusion_factors(grid, params, cfg.dt)
        self.mask = grid.dealias_mask

    def cfl_limit(self, speed: float) -> float:
        if speed == 0.0:
            return math.inf
        return self.cfg.cfl_safety * (2.0 * math.pi / self.grid.n) / speed

    def advance(self, e: ElsasserState, ev: _Evaluation, new_time: float) -> ElsasserState:
        dt = self.cfg.dt
        if dt > self.cfl_limit(ev.max_speed):
            raise CflViolation(
                f"dt={dt} exceeds CFL limit {self.cfl_limit(ev.max_speed):.3g} at t={e.time}"
            )
        grid = self.grid
        wp, wm = e.w_plus.coeffs, e.w_minus.coeffs
        np0, nm0 = ev.n_plus.coeffs, ev.n_minus.coeffs
        sp, sm = _apply_diffusion(wp + dt * np0, wm + dt * nm0, self.factors)
        stage = ElsasserState(SpectralVectorField(grid, sp), SpectralVectorField(grid, sm), e.time + dt)
        ev1 = _evaluate(stage)
        hp, hm = _apply_diffusion(wp + 0.5 * dt * np0, wm + 0.5 * dt * nm0, self.factors)
        out_p = (hp + 0.5 * dt * ev1.n_plus.coeffs) * self.mask
        out_m = (hm + 0.5 * dt * ev1.n_minus.coeffs) * self.mask
        if not (np.all(np.isfinite(out_p)) and np.all(np.isfinite(out_m))):
            raise BlowupDetected(f"non-finite state after step at t={new_time}")
        return ElsasserState(SpectralVectorField(grid, out_p), SpectralVectorField(grid, out_m), new_time)


def step(e: ElsasserState, params: FluidParams, cfg: IntegratorConfig) -> ElsasserState:
    """One integrating-factor Heun step of size ``cfg.dt``.

    Raises :class:`CflViolation` or :class:`BlowupDetected`.
    """
    stepper = _Stepper(e.grid, params, cfg)
    return stepper.advance(e, _evaluate(e), e.time + cfg.dt)


def recover_pressure(e: ElsasserState) -> ScalarSpectralField:
    """Total pressure from ``Delta P = -div div(W- (x) W+)`` with zero mean."""
    grid = e.grid
    n = grid.n
    mask = grid.dealias_mask
    wp = _irfft(e.w_plus.coeffs * mask, n)
    wm = _irfft(e.w_minus.coeffs * mask, n)
    # T[j, i] = W-_j W+_i; the double contraction is symmetric in the index order
    t_hat = _product_tensor(wm, wp, n) * mask
    k = grid.wavenumbers
    kk_t = np.einsum("j...,i...,ji...->...", k, k, t_hat)
    k2 = grid.k_squared
    p_hat = -kk_t / np.where(k2 == 0, 1.0, k2)
    p_hat[0, 0, 0] = 0.0
    return ScalarSpectralField(grid, p_hat)


def _row_exceeds(row, threshold: float) -> bool:
    values = row.csv_values()[1:]
    return any(not math.isfinite(v) or abs(v) > threshold for v in values)


def simulate(
    initial: ElsasserState,
    params: FluidParams,
    cfg: IntegratorConfig,
    cp: ConditionParams | None = None,
    config_digest: str = "",
) -> RunResult:
    """Integrate to ``cfg.t_end``, recording monitors every ``cfg.monitor_every`` steps.

    The initial state is dealiased first.  The run stops early when a
    recorded norm exceeds ``cfg.blowup_threshold`` or becomes non-finite, or
    when the CFL check fails.  All four smallness conditions are evaluated
    on the initial data and attached to the result.
    """
    cp = cp or ConditionParams()
    grid = initial.grid
    state = ElsasserState(
        dealias_two_thirds(initial.w_plus), dealias_two_thirds(initial.w_minus), initial.time
    )
    conditions = evaluate_all(params, state, cp)
    stepper = _Stepper(grid, params, cfg)
    series = MonitorSeries(params=params, config_digest=config_digest)
    n_steps = cfg.n_steps
    t0 = initial.time
    status = COMPLETED
    steps = 0
    ev = None
    try:
        ev = _evaluate(state)
        series = record_monitors(state, params, series, ev.physical)
        if _row_exceeds(series.last, cfg.blowup_threshold):
            raise BlowupDetected(f"monitored norm above {cfg.blowup_threshold} at t={state.time}")
        for i in range(1, n_steps + 1):
            state = stepper.advance(state, ev, t0 + i * cfg.dt)
            steps = i
            ev = _evaluate(state)
            if i % cfg.monitor_every == 0 or i == n_steps:
                series = record_monitors(state, params, series, ev.physical)
                if _row_exceeds(series.last, cfg.blowup_threshold):
                    raise BlowupDetected(
                        f"monitored norm above {cfg.blowup_threshold} at t={state.time}"
                    )
    except BlowupDetected as exc:
        log.warning("%s", exc)
        status = BLOWUP
    except CflViolation as exc:
        log.warning("%s", exc)
        status = CFL_VIOLATION
    return RunResult(state, series, status, steps, conditions)
