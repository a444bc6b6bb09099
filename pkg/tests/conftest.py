import numpy as np
import pytest

from gsdsim.model import HeisenbergParams, build_trial_state, TrialParams

TWO_PI = 2 * np.pi


@pytest.fixture(scope="session")
def p_h0():
    return HeisenbergParams(1.0, 0.0)


@pytest.fixture(scope="session")
def p_low():
    # below the crossing field
    return HeisenbergParams(1.0, 0.75)


@pytest.fixture(scope="session")
def p_high():
    # above the crossing field
    return HeisenbergParams(1.0, 1.25)


@pytest.fixture(scope="session")
def psi_star():
    return build_trial_state(TrialParams(-np.pi / 4, np.pi / 2))


def exact_phase_fractions(p):
    """Independent oracle: eigenvalues over 2*pi*J via dense diagonalization."""
    from gsdsim.model import build_hamiltonian

    return np.linalg.eigvalsh(build_hamiltonian(p).entries) / (TWO_PI * p.J)


def truncate_fraction(x: float, digits: int) -> float:
    """Round-toward-zero truncation to the given number of decimal digits."""
    scale = 10 ** digits
    return np.trunc(abs(x) * scale) / scale * (1 if x >= 0 else -1)
