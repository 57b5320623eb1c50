import numpy as np
import pytest
from hypothesis import settings

from quadfloquet import LatticeParams

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")


# the four driven parameter sets used throughout (L=6, periodic ring)
PANELS = {
    "a": LatticeParams(6, 7.0, 7.0, 3.0, "periodic"),
    "b": LatticeParams(6, 10.0, 10.0, 3.0, "periodic"),
    "c": LatticeParams(6, 7.0, 8.5, 10.0, "periodic"),
    "d": LatticeParams(6, 7.0, 10.0, 10.0, "periodic"),
}


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_hermitian(rng, n, scale=1.0):
    A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return scale * (A + A.conj().T) / 2


# driving-frequency grid shared by the sweep-based acceptance checks
SWEEP_GRID = np.round(np.arange(0.5, 20.0 + 1e-9, 0.1), 12)

_ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture(scope="session")
def sweeps():
    from quadfloquet import sweep_frequency

    return {k: sweep_frequency(p, SWEEP_GRID) for k, p in PANELS.items()}


@pytest.fixture
def record():
    """Store one acceptance verdict; the summary lists them in order."""
    def _record(n: int, passed: bool, detail: str) -> None:
        _ACCEPTANCE[n] = (bool(passed), detail)

    return _record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        ok, detail = _ACCEPTANCE[n]
        terminalreporter.write_line(f"CRITERION {n}: {'PASS' if ok else 'FAIL'} - {detail}")
