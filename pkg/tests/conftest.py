import numpy as np
import pytest

from adaptedbw import AR1Spec, LowerBlockFactor, ar1_factor


def random_spd(rng, n, ridge=0.1):
    G = rng.standard_normal((n, n))
    return G @ G.T / n + ridge * np.eye(n)


def random_factor(rng, d, T, ridge=0.1):
    """Cholesky factor of a random SPD matrix, so regular by construction."""
    return LowerBlockFactor(np.linalg.cholesky(random_spd(rng, d * T, ridge)), d)


def random_block_lower(rng, d, T):
    """Arbitrary block-lower-triangular factor, possibly not regular."""
    A = rng.standard_normal((d * T, d * T))
    for t in range(T):
        A[t * d:(t + 1) * d, (t + 1) * d:] = 0.0
    return LowerBlockFactor(A, d)


def random_ar1(rng, T, mixed_signs=True):
    lo = -0.9 if mixed_signs else 0.0
    alphas = rng.uniform(lo, 0.9, T)
    sigmas = rng.uniform(0.5, 1.5, T)
    return ar1_factor(AR1Spec(tuple(alphas), tuple(sigmas)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
        terminalreporter.write_line(line)
