import numpy as np
import pytest
from hypothesis import strategies as st

from ensemble_tcl import DrawMatrix


def random_unit_draws(rng: np.random.Generator, S: int) -> np.ndarray:
    """Draws from one of several continuous, atomic or mixed distributions."""
    kind = rng.integers(7)
    loc = rng.normal(0, 2)
    if kind == 0:
        return rng.normal(loc, rng.uniform(0.1, 3), S)
    if kind == 1:
        return rng.uniform(loc - 2, loc + 2, S)
    if kind == 2:
        return loc + rng.exponential(1.0, S)
    if kind == 3:  # integer-valued, many ties
        return np.round(rng.normal(loc, 2, S))
    if kind == 4:  # few atoms
        atoms = rng.normal(loc, 1, rng.integers(1, 4))
        return rng.choice(atoms, S)
    if kind == 5:  # mixture with an atom at zero (a common threshold)
        x = rng.normal(loc, 1, S)
        x[rng.random(S) < 0.3] = 0.0
        return x
    return np.full(S, float(np.round(loc)))


def random_matrix(rng: np.random.Generator, max_n: int = 20, max_S: int = 500) -> DrawMatrix:
    n = int(rng.integers(1, max_n + 1))
    S = int(rng.integers(1, max_S + 1))
    draws = np.stack([random_unit_draws(rng, S) for _ in range(n)])
    return DrawMatrix([f"u{i}" for i in range(n)], draws)


def thresholds_for(rng: np.random.Generator, m: DrawMatrix) -> list[float]:
    """A generic cut-off, one sitting exactly on a draw, and zero."""
    on_draw = float(m.draws[rng.integers(m.n), rng.integers(m.S)])
    return [float(rng.normal(0, 2)), on_draw, 0.0]


finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False, allow_infinity=False)
small_ints = st.integers(-5, 5).map(float)
draw_values = st.one_of(finite, small_ints)
unit_draws = st.lists(draw_values, min_size=1, max_size=40)
levels = st.floats(min_value=0.0, max_value=1.0)
weights = st.one_of(levels, st.sampled_from([0.0, 0.1, 0.2, 0.25, 0.3, 0.5, 0.7, 0.75, 0.9, 1.0]))


@st.composite
def draw_matrices(draw, max_n=8, max_S=30):
    n = draw(st.integers(1, max_n))
    S = draw(st.integers(1, max_S))
    rows = [draw(st.lists(draw_values, min_size=S, max_size=S)) for _ in range(n)]
    return DrawMatrix([f"u{i}" for i in range(n)], np.array(rows))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion():
    """Record one summary line per acceptance criterion."""

    def record(number: int, title: str, ok: bool, detail: str = "") -> None:
        status = "PASS" if ok else "FAIL"
        ACCEPTANCE_LINES.append(f"[{status}] criterion {number}: {title}" + (f" ({detail})" if detail else ""))
        assert ok, f"criterion {number} failed: {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
