import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from natrans.lie import AlgebraElement, Signature

settings.register_profile(
    "natrans", max_examples=120, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("natrans")

SIGNATURES = list(Signature)

finite = st.floats(-3.0, 3.0, allow_nan=False, allow_infinity=False)
coeffs = st.tuples(finite, finite, finite).map(np.array)


@st.composite
def elements(draw, sig=None):
    s = draw(st.sampled_from(SIGNATURES)) if sig is None else sig
    return AlgebraElement(draw(coeffs), s)


@st.composite
def elliptic(draw, sig):
    """Elements with a well-defined Cartan decomposition (timelike for su(1,1))."""
    c = draw(coeffs)
    if sig is Signature.NONCOMPACT:
        c[2] = np.copysign(abs(c[2]) + np.hypot(c[0], c[1]) + 0.1, c[2] if c[2] else 1.0)
    elif np.linalg.norm(c) < 1e-3:
        c[2] = 1.0
    return AlgebraElement(c, sig)


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
