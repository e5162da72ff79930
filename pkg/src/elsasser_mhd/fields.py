"""Physical parameters, primitive <-> Elsasser conversion, rescaling and initial data."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .spectral import (
    Grid,
    PhysicalVectorField,
    SpectralVectorField,
    dealias_two_thirds,
    divergence_max,
    leray_project,
    to_spectral,
)

__all__ = [
    "ParameterError",
    "InitialDataError",
    "FluidParams",
    "make_params",
    "ElsasserState",
    "PrimitiveState",
    "InitialDataSpec",
    "to_elsasser",
    "from_elsasser",
    "rescale_to_v",
    "generate_initial",
    "initial_elsasser",
]

INITIAL_KINDS = ("taylor-green", "single-mode", "random-solenoidal")


class ParameterError(ValueError):
    pass


class InitialDataError(ValueError):
    pass


@dataclass(frozen=True)
class FluidParams:
    """Reynolds numbers, coupling ``S`` and the derived Elsasser diffusivities.

    ``kappa`` is the mean and ``lam`` the half-difference of the two
    diffusivities ``1/re`` and ``1/rm``.
    """

    re: float
    rm: float
    s_coupling: float = 1.0
    kappa: float = field(init=False)
    lam: float = field(init=False)

    def __post_init__(self):
        if not (self.re > 0 and math.isfinite(self.re)):
            raise ParameterError(f"re must be > 0, got {self.re!r}")
        if not (self.rm > 0 and math.isfinite(self.rm)):
            raise ParameterError(f"rm must be > 0, got {self.rm!r}")
        if not (self.s_coupling >= 0 and math.isfinite(self.s_coupling)):
            raise ParameterError(f"s must be >= 0, got {self.s_coupling!r}")
        kappa = 0.5 / self.re + 0.5 / self.rm
        lam = 0.5 / self.re - 0.5 / self.rm
        if not kappa > abs(lam):
            raise ParameterError("kappa > |lambda| violated")
        object.__setattr__(self, "kappa", kappa)
        object.__setattr__(self, "lam", lam)

    @classmethod
    def from_kappa_lambda(cls, kappa: float, lam: float, s_coupling: float = 1.0):
        """Parameters with prescribed ``kappa`` and ``lam`` (requires ``kappa > |lam|``)."""
        if not kappa > abs(lam):
            raise ParameterError(f"need kappa > |lambda|, got kappa={kappa}, lambda={lam}")
        return cls(re=1.0 / (kappa + lam), rm=1.0 / (kappa - lam), s_coupling=s_coupling)

    @property
    def b_scale(self) -> float:
        """Factor ``sqrt(S)`` absorbed into the magnetic field at ingestion."""
        return math.sqrt(self.s_coupling)

    @property
    def lambda_kappa_ratio(self) -> float:
        return abs(self.lam) / self.kappa

    @property
    def nu_u(self) -> float:
        return 1.0 / self.re

    @property
    def nu_b(self) -> float:
        return 1.0 / self.rm


def make_params(re: float, rm: float, s_coupling: float = 1.0) -> FluidParams:
    return FluidParams(re=re, rm=rm, s_coupling=s_coupling)


@dataclass(frozen=True, eq=False)
class ElsasserState:
    w_plus: SpectralVectorField
    w_minus: SpectralVectorField
    time: float = 0.0

    def __post_init__(self):
        if self.w_plus.grid.n != self.w_minus.grid.n:
            raise ValueError("W+ and W- live on different grids")

    @property
    def grid(self) -> Grid:
        return self.w_plus.grid

    def validate(self, div_tol: float = 1e-10) -> None:
        """Check the solenoidal and mean-zero invariants."""
        for name, f in (("w_plus", self.w_plus), ("w_minus", self.w_minus)):
            scale = max(1.0, float(np.max(np.abs(f.coeffs))))
            if divergence_max(f) > div_tol * scale:
                raise ValueError(f"{name} is not divergence-free")
            if np.any(f.mean != 0):
                raise ValueError(f"{name} has a nonzero mean mode")


@dataclass(frozen=True, eq=False)
class PrimitiveState:
    u: SpectralVectorField
    b: SpectralVectorField
    time: float = 0.0

    def __post_init__(self):
        if self.u.grid.n != self.b.grid.n:
            raise ValueError("u and B live on different grids")

    @property
    def grid(self) -> Grid:
        return self.u.grid


def to_elsasser(p: PrimitiveState, params: FluidParams | None = None) -> ElsasserState:
    """``W+ = u + B``, ``W- = u - B``.  ``B`` must already carry the ``sqrt(S)`` factor."""
    return ElsasserState(p.u + p.b, p.u - p.b, p.time)


def from_elsasser(e: ElsasserState) -> PrimitiveState:
    u = SpectralVectorField(e.grid, 0.5 * (e.w_plus.coeffs + e.w_minus.coeffs))
    b = SpectralVectorField(e.grid, 0.5 * (e.w_plus.coeffs - e.w_minus.coeffs))
    return PrimitiveState(u, b, e.time)


def rescale_to_v(e: ElsasserState, params: FluidParams) -> tuple[ElsasserState, FluidParams]:
    """Map ``W`` at time ``t`` to ``V = W / kappa`` at time ``kappa * t``.

    The returned parameters have ``kappa = 1`` and ``lambda = lambda / kappa``,
    under which the Elsasser system for ``V`` has the same form as for ``W``.
    """
    k = params.kappa
    if not k > 0:
        raise ParameterError("kappa must be positive to rescale")
    scaled = FluidParams.from_kappa_lambda(1.0, params.lam / k, params.s_coupling)
    if k == 1.0:
        return ElsasserState(e.w_plus, e.w_minus, e.time), scaled
    return ElsasserState(e.w_plus * (1.0 / k), e.w_minus * (1.0 / k), e.time * k), scaled


@dataclass(frozen=True)
class InitialDataSpec:
    """Description of initial velocity and magnetic field.

    The velocity is built from ``kind``/``amplitude``/``seed``/``k0`` and
    optionally rescaled so that ``target_norm = (name, value)`` holds, where
    ``name`` is ``"l2"``, ``"l3"`` or ``"h12"``.  The magnetic field is
    ``b_scale * u`` plus an independent random solenoidal perturbation of
    L2 norm ``b_noise`` (seeded with ``seed + 1``).  ``b_scale = 1`` and
    ``b_noise = 0`` give ``W- = 0``.
    """

    kind: str = "taylor-green"
    amplitude: float = 1.0
    seed: int = 0
    k0: int = 2
    target_norm: tuple[str, float] | None = None
    b_scale: float = 1.0
    b_noise: float = 0.0

    def __post_init__(self):
        if self.kind not in INITIAL_KINDS:
            raise InitialDataError(f"unknown initial kind {self.kind!r}; expected one of {INITIAL_KINDS}")
        if not math.isfinite(self.amplitude):
            raise InitialDataError("amplitude must be finite")
        if not (math.isfinite(self.b_scale) and math.isfinite(self.b_noise) and self.b_noise >= 0):
            raise InitialDataError("b_scale must be finite and b_noise finite and >= 0")
        if self.target_norm is not None:
            name, value = self.target_norm
            if name not in ("l2", "l3", "h12") or not (value >= 0 and math.isfinite(value)):
                raise InitialDataError(f"bad target_norm {self.target_norm!r}")


def _taylor_green(grid: Grid, amplitude: float) -> SpectralVectorField:
    x, y, z = grid.nodes
    values = amplitude * np.stack(
        [np.sin(x) * np.cos(y) * np.cos(z), -np.cos(x) * np.sin(y) * np.cos(z), np.zeros_like(x)]
    )
    return to_spectral(PhysicalVectorField(grid, values))


def _single_mode(grid: Grid, amplitude: float) -> SpectralVectorField:
    # a*cos(x1) e2
    return SpectralVectorField.from_modes(grid, {(1, 0, 0): (0.0, 0.5 * amplitude, 0.0)})


def _random_solenoidal(grid: Grid, amplitude: float, seed: int, k0: int) -> SpectralVectorField:
    if not (1 <= k0 <= grid.n // 3):
        raise InitialDataError(f"k0={k0} outside the resolved band [1, {grid.n // 3}]")
    rng = np.random.default_rng(seed)
    n = grid.n
    # white noise in physical space has an exactly Hermitian transform
    noise = rng.standard_normal((3, n, n, n))
    g = to_spectral(PhysicalVectorField(grid, noise))
    kabs = grid.k_abs
    # shell energy E(k) ~ k^4 exp(-2 (k/k0)^2); per-mode amplitude ~ sqrt(E(k) / k^2)
    envelope = kabs * np.exp(-((kabs / k0) ** 2))
    coeffs = g.coeffs * envelope * grid.dealias_mask
    coeffs[:, 0, 0, 0] = 0.0
    g = leray_project(SpectralVectorField(grid, coeffs))
    norm = _l2(g)
    if norm == 0.0:
        raise InitialDataError("random field vanished after projection")
    return g * (amplitude / norm)


def _l2(g: SpectralVectorField) -> float:
    w = g.grid.half_weights
    return math.sqrt((2 * np.pi) ** 3 * float(np.sum(w * np.abs(g.coeffs) ** 2)))


def _named_norm(g: SpectralVectorField, name: str) -> float:
    from .norms import hs_norm, lp_norm
    from .spectral import to_physical

    if name == "l2":
        return hs_norm(g, 0.0)
    if name == "h12":
        return hs_norm(g, 0.5)
    return lp_norm(to_physical(g), 3.0)


def generate_initial(spec: InitialDataSpec, grid: Grid) -> PrimitiveState:
    """Divergence-free, mean-zero initial ``(u, B)``; deterministic for a fixed seed."""
    if spec.kind == "taylor-green":
        u = _taylor_green(grid, spec.amplitude)
    elif spec.kind == "single-mode":
        u = _single_mode(grid, spec.amplitude)
    else:
        u = _random_solenoidal(grid, spec.amplitude, spec.seed, spec.k0)
    u = dealias_two_thirds(u)
    u.coeffs[:, 0, 0, 0] = 0.0
    if spec.target_norm is not None:
        name, value = spec.target_norm
        current = _named_norm(u, name)
        if current == 0.0:
            raise InitialDataError("cannot rescale a zero field to a target norm")
        u = u * (value / current)
    b = u * spec.b_scale
    if spec.b_noise > 0:
        b = b + _random_solenoidal(grid, spec.b_noise, spec.seed + 1, min(spec.k0, grid.n // 3))
    return PrimitiveState(u, b, 0.0)


def initial_elsasser(spec: InitialDataSpec, grid: Grid, params: FluidParams) -> ElsasserState:
    """Generate primitive data, absorb ``sqrt(S)`` into ``B`` and convert."""
    p = generate_initial(spec, grid)
    if params.s_coupling != 1.0:
        p = replace(p, b=p.b * params.b_scale)
    return to_elsasser(p, params)
