import numpy as np
import pytest

from elsasser_mhd.spectral import PhysicalVectorField, get_grid, to_spectral


@pytest.fixture
def grid32():
    return get_grid(32)


@pytest.fixture
def grid16():
    return get_grid(16)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def cos_x1_e2(grid, amplitude=1.0):
    x = grid.nodes[0]
    values = np.zeros((3,) + grid.physical_shape)
    values[1] = amplitude * np.cos(x)
    return PhysicalVectorField(grid, values)


def band_limited(grid, rng, kmax=3):
    """Random real field whose modes all satisfy |k_i| <= kmax."""
    values = rng.standard_normal((3,) + grid.physical_shape)
    g = to_spectral(PhysicalVectorField(grid, values))
    keep = np.all(np.abs(grid.wavenumbers) <= kmax, axis=0)
    g.coeffs[...] *= keep
    return g


_CRITERIA: list[tuple[str, bool, str]] = []


@pytest.fixture
def criterion():
    """Record one acceptance line; returns ``ok`` so the caller can assert on it."""

    def record(name: str, ok: bool, detail: str = "") -> bool:
        _CRITERIA.append((name, bool(ok), detail))
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
        return bool(ok)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in _CRITERIA:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")
