import numpy as np
import pytest
from hypothesis import strategies as st

from kslab.spectral import Grid, SpectralField

ACCEPTANCE_LINES: list[str] = []


def random_real_field(grid: Grid, seed: int, decay: float = 0.0, band: int | None = None) -> SpectralField:
    """Random Hermitian coefficients, optionally decaying like <k>^-decay and band-limited."""
    rng = np.random.default_rng(seed)
    c = (rng.standard_normal(grid.n) + 1j * rng.standard_normal(grid.n)) * grid.bracket ** (-decay)
    if band is not None:
        c = np.where(np.abs(grid.modes) <= band, c, 0.0)
    return SpectralField.real(grid, c)


@st.composite
def real_fields(draw, max_n: int = 64):
    n = draw(st.sampled_from([n for n in (8, 16, 32, 64, 128) if n <= max_n]))
    L = draw(st.floats(min_value=0.5, max_value=50.0))
    seed = draw(st.integers(min_value=0, max_value=2**31 - 1))
    decay = draw(st.floats(min_value=0.0, max_value=3.0))
    return random_real_field(Grid(L, n), seed, decay)


@pytest.fixture(scope="session")
def big_grid():
    return Grid(32.0, 1024)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
