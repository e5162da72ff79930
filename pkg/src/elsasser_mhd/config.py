"""Flat ``key = value`` run configuration with dotted key paths.

Example::

    # Taylor-Green data, equal Reynolds numbers
    grid.n = 32
    params.re = 1.0
    params.rm = 1.0
    initial.kind = taylor-green
    initial.b_noise = 0.02
    integrator.dt = 1e-3
    integrator.t_end = 0.5
    output.formats = ["csv", "json", "png"]

Values are Python literals (numbers, quoted strings, lists, ``True``/
``False``/``None``); an unquoted word is taken as a string.  Lines starting
with ``#`` are comments.  Unknown keys are rejected.
"""

from __future__ import annotations

import ast
import hashlib
import itertools
import math
from dataclasses import dataclass, field

from .conditions import ConditionParams
from .dynamics import IntegratorConfig
from .fields import INITIAL_KINDS, FluidParams, InitialDataSpec
from .spectral import Grid

__all__ = ["ConfigError", "RunConfig", "SweepConfig", "parse_config", "parse_sweep_config", "DEFAULTS"]


class ConfigError(ValueError):
    """Invalid configuration; ``key`` names the offending dotted path."""

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}" if key else message)


def _positive(x):
    return x > 0 and math.isfinite(x)


def _is_power_of_two(n):
    return n >= 8 and n & (n - 1) == 0


OUTPUT_FORMATS = ("csv", "json", "png", "checkpoint")
SWEEP_MODES = ("conditions-only", "simulate")

# key -> (default, kind, check, constraint text)
SCHEMA = {
    "grid.n": (32, int, _is_power_of_two, "n must be a power of two >= 8"),
    "params.re": (1.0, float, _positive, "re must be > 0"),
    "params.rm": (1.0, float, _positive, "rm must be > 0"),
    "params.s": (1.0, float, lambda x: x >= 0 and math.isfinite(x), "s must be >= 0"),
    "initial.kind": ("taylor-green", str, lambda x: x in INITIAL_KINDS, f"kind must be one of {INITIAL_KINDS}"),
    "initial.amplitude": (1.0, float, math.isfinite, "amplitude must be finite"),
    "initial.seed": (0, int, lambda x: x >= 0, "seed must be >= 0"),
    "initial.k0": (2, int, lambda x: x >= 1, "k0 must be >= 1"),
    "initial.target_norm": (None, "target", None, "target_norm must be [name, value] with name in l2/l3/h12"),
    "initial.b_scale": (1.0, float, math.isfinite, "b_scale must be finite"),
    "initial.b_noise": (0.0, float, lambda x: x >= 0 and math.isfinite(x), "b_noise must be >= 0"),
    "integrator.dt": (1e-3, float, _positive, "dt must be > 0"),
    "integrator.t_end": (1.0, float, lambda x: x >= 0 and math.isfinite(x), "t_end must be >= 0"),
    "integrator.cfl_safety": (0.5, float, lambda x: 0 < x <= 1, "cfl_safety must lie in (0, 1]"),
    "integrator.blowup_threshold": (1e6, float, lambda x: x > 0, "blowup_threshold must be > 0"),
    "integrator.monitor_every": (1, int, lambda x: x >= 1, "monitor_every must be >= 1"),
    "conditions.epsilon0": (0.01, float, lambda x: 0 < x < 0.5, "epsilon0 must lie in (0, 1/2)"),
    "conditions.c0": (1.0, float, _positive, "c0 must be > 0"),
    "output.directory": ("out", str, lambda x: bool(x), "directory must be non-empty"),
    "output.formats": (
        ["csv", "json", "png"],
        list,
        lambda x: all(f in OUTPUT_FORMATS for f in x),
        f"formats must be drawn from {OUTPUT_FORMATS}",
    ),
    "verify.convergence": (False, bool, None, "convergence must be a boolean"),
    "verify.convergence_dt": (0.02, float, _positive, "convergence_dt must be > 0"),
    "verify.convergence_t_end": (0.5, float, _positive, "convergence_t_end must be > 0"),
}

SWEEP_SCHEMA = {
    "sweep.mode": ("conditions-only", str, lambda x: x in SWEEP_MODES, f"mode must be one of {SWEEP_MODES}"),
    "sweep.cap": (1000, int, lambda x: x >= 1, "cap must be >= 1"),
    "sweep.workers": (1, int, lambda x: x >= 1, "workers must be >= 1"),
}

DEFAULTS = {k: v[0] for k, v in SCHEMA.items()}


def _parse_value(text: str):
    try:
        return ast.literal_eval(text)
    except (ValueError, SyntaxError):
        if any(c in text for c in "[]{}(),'\""):
            raise
        return text


def _read_pairs(text: str) -> list[tuple[str, object]]:
    pairs = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError("", f"line {lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        key = key.strip()
        if not key:
            raise ConfigError("", f"line {lineno}: empty key")
        try:
            pairs.append((key, _parse_value(value.strip())))
        except (ValueError, SyntaxError):
            raise ConfigError(key, f"unparseable value {value.strip()!r}") from None
    return pairs


def _coerce(key: str, value, spec):
    default, kind, check, constraint = spec
    if kind == "target":
        if value is None:
            return None
        if isinstance(value, str) and ":" in value:
            name, _, num = value.partition(":")
            value = [name, num]
        try:
            name, num = value
            out = (str(name), float(num))
        except (TypeError, ValueError):
            raise ConfigError(key, constraint) from None
        if out[0] not in ("l2", "l3", "h12") or not (out[1] >= 0 and math.isfinite(out[1])):
            raise ConfigError(key, constraint)
        return out
    if kind is bool:
        if not isinstance(value, bool):
            raise ConfigError(key, constraint)
        return value
    if kind is int:
        if isinstance(value, bool) or not (isinstance(value, int) or (isinstance(value, float) and value.is_integer())):
            raise ConfigError(key, f"expected an integer, got {value!r}")
        value = int(value)
    elif kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(key, f"expected a number, got {value!r}")
        value = float(value)
    elif kind is str:
        if not isinstance(value, str):
            raise ConfigError(key, f"expected a string, got {value!r}")
    elif kind is list:
        if isinstance(value, str):
            value = [value]
        if not isinstance(value, (list, tuple)):
            raise ConfigError(key, f"expected a list, got {value!r}")
        value = list(value)
    if check is not None and not check(value):
        raise ConfigError(key, f"{constraint} (got {value!r})")
    return value


@dataclass(frozen=True)
class RunConfig:
    grid: Grid
    params: FluidParams
    initial: InitialDataSpec
    integrator: IntegratorConfig
    conditions: ConditionParams
    output_directory: str
    output_formats: tuple[str, ...]
    verify_convergence: bool
    verify_convergence_dt: float
    verify_convergence_t_end: float
    flat: dict = field(compare=False, repr=False)

    @property
    def digest(self) -> str:
        canon = "\n".join(f"{k}={self.flat[k]!r}" for k in sorted(self.flat))
        return hashlib.sha256(canon.encode()).hexdigest()[:16]


def build_config(values: dict) -> RunConfig:
    """Validate a flat ``{dotted key: value}`` mapping into a :class:`RunConfig`."""
    flat = dict(DEFAULTS)
    for key, value in values.items():
        if key not in SCHEMA:
            raise ConfigError(key, "unknown key")
        flat[key] = _coerce(key, value, SCHEMA[key])

    n = flat["grid.n"]
    k0 = flat["initial.k0"]
    if flat["initial.kind"] == "random-solenoidal" and k0 > n // 3:
        raise ConfigError("initial.k0", f"k0 must be <= n/3 = {n // 3} (got {k0})")
    try:
        initial = InitialDataSpec(
            kind=flat["initial.kind"],
            amplitude=flat["initial.amplitude"],
            seed=flat["initial.seed"],
            k0=k0,
            target_norm=flat["initial.target_norm"],
            b_scale=flat["initial.b_scale"],
            b_noise=flat["initial.b_noise"],
        )
    except ValueError as exc:
        raise ConfigError("initial", str(exc)) from None
    try:
        params = FluidParams(flat["params.re"], flat["params.rm"], flat["params.s"])
    except ValueError as exc:
        raise ConfigError("params", str(exc)) from None
    return RunConfig(
        grid=Grid(n),
        params=params,
        initial=initial,
        integrator=IntegratorConfig(
            dt=flat["integrator.dt"],
            t_end=flat["integrator.t_end"],
            cfl_safety=flat["integrator.cfl_safety"],
            blowup_threshold=flat["integrator.blowup_threshold"],
            monitor_every=flat["integrator.monitor_every"],
        ),
        conditions=ConditionParams(flat["conditions.epsilon0"], flat["conditions.c0"]),
        output_directory=flat["output.directory"],
        output_formats=tuple(flat["output.formats"]),
        verify_convergence=flat["verify.convergence"],
        verify_convergence_dt=flat["verify.convergence_dt"],
        verify_convergence_t_end=flat["verify.convergence_t_end"],
        flat=flat,
    )


def _check_duplicates(pairs):
    seen = set()
    for key, _ in pairs:
        if key in seen:
            raise ConfigError(key, "duplicate key")
        seen.add(key)


def parse_config(text: str) -> RunConfig:
    """Parse and validate a run configuration; raises :class:`ConfigError`."""
    pairs = _read_pairs(text)
    _check_duplicates(pairs)
    return build_config(dict(pairs))


@dataclass(frozen=True)
class SweepConfig:
    base: dict
    axes: tuple[tuple[str, tuple], ...]
    mode: str = "conditions-only"
    cap: int = 1000
    workers: int = 1

    @property
    def size(self) -> int:
        return math.prod(len(v) for _, v in self.axes) if self.axes else 1

    def points(self):
        """Cartesian product of the axes, first axis slowest."""
        names = [name for name, _ in self.axes]
        for combo in itertools.product(*(values for _, values in self.axes)):
            yield dict(zip(names, combo))


def parse_sweep_config(text: str) -> SweepConfig:
    """Base run keys plus ``sweep.mode``, ``sweep.cap``, ``sweep.workers`` and
    ``sweep.axes.<run key> = [values]`` lines."""
    pairs = _read_pairs(text)
    _check_duplicates(pairs)
    base, axes, opts = {}, [], {}
    for key, value in pairs:
        if key.startswith("sweep.axes."):
            target = key[len("sweep.axes."):]
            if target not in SCHEMA:
                raise ConfigError(key, f"unknown sweep axis {target!r}")
            if not isinstance(value, (list, tuple)) or not value:
                raise ConfigError(key, "axis values must be a non-empty list")
            axes.append((target, tuple(value)))
        elif key.startswith("sweep."):
            if key not in SWEEP_SCHEMA:
                raise ConfigError(key, "unknown key")
            opts[key] = _coerce(key, value, SWEEP_SCHEMA[key])
        else:
            base[key] = value
    build_config(base)
    sc = SweepConfig(
        base=base,
        axes=tuple(axes),
        mode=opts.get("sweep.mode", SWEEP_SCHEMA["sweep.mode"][0]),
        cap=opts.get("sweep.cap", SWEEP_SCHEMA["sweep.cap"][0]),
        workers=opts.get("sweep.workers", SWEEP_SCHEMA["sweep.workers"][0]),
    )
    if sc.size > sc.cap:
        raise ConfigError("sweep.cap", f"sweep has {sc.size} points, cap is {sc.cap}")
    return sc
