import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_problem(rng, n, p, d_kind="D2", k_signal=2, snr=2.0):
    """Small random structural problem with a few strong coordinates."""
    from skf.augment import StructuralProblem
    from skf.experiments import make_D

    x = rng.standard_normal((n, p))
    beta = np.zeros(p)
    beta[:k_signal] = snr * rng.choice([-1.0, 1.0], size=k_signal)
    y = x @ beta + 0.5 * rng.standard_normal(n)
    d = make_D(d_kind, p)
    return StructuralProblem(x, y, d), beta


@pytest.fixture
def small_problem(rng):
    problem, _ = random_problem(rng, 40, 8)
    return problem
