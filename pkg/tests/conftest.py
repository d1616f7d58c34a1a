import numpy as np
import pytest

from lindblad3q.model import QuadraticLindbladSpec


def random_hermitian(rng, M, scale=1.0):
    X = rng.normal(size=(M, M)) + 1j * rng.normal(size=(M, M))
    return scale * (X + X.conj().T) / 2


def random_u1_spec(rng, M, statistics="boson", loss=0.6, pump=0.2):
    """Random U(1)-symmetric spec: loss and pump act through separate baths so C = 0.

    For bosons the loss matrix is shifted up to keep L - P positive, which
    makes every eigenvalue of H_eff strictly damped.
    """
    H = random_hermitian(rng, M)
    l = loss * (rng.normal(size=(M, M)) + 1j * rng.normal(size=(M, M)))
    p = pump * (rng.normal(size=(M, M)) + 1j * rng.normal(size=(M, M)))
    if statistics == "boson":
        P = p.conj().T @ p
        shift = np.linalg.eigvalsh(P).max() + 0.2
        l = np.vstack([l, np.sqrt(shift) * np.eye(M)])
        p = np.vstack([p, np.zeros((M, M))])
    zeros = np.zeros_like(l)
    zeros_p = np.zeros_like(p)
    couplings_l = np.vstack([l, zeros_p])
    couplings_p = np.vstack([zeros, p])
    return QuadraticLindbladSpec.from_couplings(statistics, H, couplings_l, couplings_p)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
