"""Third quantization of quadratic fermionic Lindbladians.

Compared to bosons the roles of loss and pump swap sign in the noise:
``H_eff = H - (i/2)(L + P)`` and ``N = L - P``. The anti-symmetrized
covariance ``A_mn = <[c_m, c_n^dagger]>`` obeys the same Lyapunov equation
as the bosonic ``S``, and Pauli exclusion confines its spectrum to [-1, 1].
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import _linalg
from .errors import CapacityError, InstabilityError, NoiseInequalityError, SpecError, U1BreakingError
from .model import TAU_PSD, validate_spec
from .thirdq_boson import SPECTRUM_CAP, TAU_STAB, liouvillian_eigenvalue, sort_spectrum


@dataclass(frozen=True, eq=False)
class ThirdQuantizedFermion:
    H_eff: np.ndarray
    K_eff: np.ndarray
    N: np.ndarray
    Q: np.ndarray

    @property
    def modes(self):
        return self.H_eff.shape[0]

    @property
    def u1_symmetric(self):
        return not (np.any(self.K_eff) or np.any(self.Q))


@dataclass(frozen=True, eq=False)
class FermionSpectralData:
    E: np.ndarray
    PsiR: np.ndarray
    PsiL: np.ndarray
    A_ss: np.ndarray
    condition: float = 1.0


@dataclass(frozen=True)
class GrassmannKernelCoeffs:
    """Exponent coefficients of the single-mode fermionic kernel.

    ``cK`` multiplies the Keldysh (quantum-quantum) bilinear, ``cR`` and
    ``cA`` the retarded and advanced ones.
    """

    cK: complex
    cR: complex
    cA: complex


def third_quantize_fermion(spec, check=True):
    if spec.statistics != "fermion":
        raise SpecError("third_quantize_fermion expects a fermionic spec")
    if check:
        report = validate_spec(spec)
        if not report.passed:
            raise SpecError(str(report))
    L, P, C = spec.L, spec.P, spec.C
    H_eff = spec.H - 0.5j * (L + P)
    K_eff = spec.K - 0.5j * (C + C.T)
    N = L - P
    Q = 0.5 * (C - C.T)
    gap = 1j * (H_eff - H_eff.conj().T) - N
    low = np.linalg.eigvalsh(0.5 * (gap + gap.conj().T)).min()
    if low < -TAU_PSD:
        raise NoiseInequalityError(f"noise exceeds dissipation by {-low:.3e} (Pauli bound)")
    return ThirdQuantizedFermion(H_eff, K_eff, N, Q)


def _require_u1(tq):
    if not tq.u1_symmetric:
        raise U1BreakingError("fermionic pairing terms are only supported by the oracle")


def solve_steady_covariance_fermion(tq):
    """``A_ss`` with ``H_eff A - A H_eff^dagger + i N = 0``."""
    _require_u1(tq)
    margin = float(np.linalg.eigvals(tq.H_eff).imag.max())
    if margin >= -TAU_STAB:
        raise InstabilityError(f"no steady state: max Im(E) = {margin:.3e}")
    return _linalg.solve_lyapunov(tq.H_eff, tq.N)


def fermion_spectral_data(tq):
    A_ss = solve_steady_covariance_fermion(tq)
    E, PsiR, PsiL, cond = _linalg.biorthogonal_eig(tq.H_eff)
    return FermionSpectralData(E, PsiR, PsiL, A_ss, cond)


def evolve_anticovariance(tq, A0, t):
    """``A(t) = U A0 U^dagger + int_0^t U N U^dagger``, ``U = exp(-i H_eff t)``."""
    _require_u1(tq)
    if t < 0:
        raise ValueError("t must be non-negative")
    prop, noise = _linalg.driven_integral(tq.H_eff, tq.N, t)
    A = prop @ np.asarray(A0, dtype=complex) @ prop.conj().T + noise
    return 0.5 * (A + A.conj().T)


def fermion_spectrum(E, max_excitations=None, cap=SPECTRUM_CAP):
    """Lindbladian eigenvalues over occupation bit-lists ``mu, nu in {0, 1}^M``.

    ``max_excitations`` optionally bounds ``sum(mu + nu)``; without it all
    ``4**M`` values are produced (subject to ``cap``).
    """
    E = np.atleast_1d(np.asarray(E, dtype=complex))
    M = len(E)
    if max_excitations is None:
        count = 4 ** M
    else:
        from math import comb
        count = sum(comb(2 * M, k) for k in range(min(max_excitations, 2 * M) + 1))
    if count > cap:
        raise CapacityError(f"{count} spectral indices exceed the cap of {cap}")
    entries = []
    for bits in itertools.product((0, 1), repeat=2 * M):
        if max_excitations is not None and sum(bits) > max_excitations:
            continue
        mu, nu = bits[:M], bits[M:]
        entries.append(((mu, nu), liouvillian_eigenvalue(E, mu, nu)))
    return sort_spectrum(entries)


def fermion_kernel_single(eps0, gamma, nth, t):
    """Kernel exponent coefficients for one level with decay rate ``gamma``.

    ``cK = -(1 - 2 nth)(1 - exp(-gamma t))``,
    ``cR = exp((-i eps0 - gamma/2) t)``, ``cA = -exp((i eps0 - gamma/2) t)``.
    """
    if t < 0 or gamma < 0 or not 0 <= nth <= 1:
        raise ValueError("need t >= 0, gamma >= 0 and 0 <= nth <= 1")
    decay = np.exp(-gamma * t)
    cK = -(1 - 2 * nth) * (1 - decay)
    cR = np.exp((-1j * eps0 - gamma / 2) * t)
    cA = -np.exp((1j * eps0 - gamma / 2) * t)
    return GrassmannKernelCoeffs(complex(cK), complex(cR), complex(cA))
