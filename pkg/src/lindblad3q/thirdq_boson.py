"""Third quantization of quadratic bosonic Lindbladians.

With ``i d rho/dt = Lindbladian(rho)`` the U(1)-symmetric part of the
generator is fixed by two matrices: the non-Hermitian dynamical matrix
``H_eff = H - (i/2)(L - P)`` and the noise matrix ``N = L + P``. Eigenvalues
of the Lindbladian are the lattice ``sum_s (E_s mu_s - conj(E_s) nu_s)`` built
from the eigenvalues ``E_s`` of ``H_eff``; the noise only enters the
steady-state covariance through a continuous Lyapunov equation.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _linalg
from .errors import CapacityError, InstabilityError, NoiseInequalityError, SpecError, U1BreakingError
from .model import TAU_PSD, validate_spec

TAU_STAB = 1e-12
SPECTRUM_CAP = 1_000_000


@dataclass(frozen=True, eq=False)
class ThirdQuantizedBoson:
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
class SpectralData:
    """Eigensystem of ``H_eff`` plus the steady-state covariance.

    ``PsiR`` holds right eigenvectors as columns, ``PsiL`` left eigenvectors
    as rows, normalized so that ``PsiL @ PsiR`` is the identity.
    ``S_ss`` is ``<{a_m, a_n^dagger}>`` in the steady state.
    """

    E: np.ndarray
    PsiR: np.ndarray
    PsiL: np.ndarray
    S_ss: np.ndarray
    condition: float = 1.0


def third_quantize(spec, check=True):
    """Split a bosonic spec into dynamics ``(H_eff, K_eff)`` and noise ``(N, Q)``.

    Raises
    ------
    NoiseInequalityError
        If ``i (H_eff - H_eff^dagger)`` exceeds ``N`` anywhere, i.e. the
        matrices cannot come from a Lindbladian.
    """
    if spec.statistics != "boson":
        raise SpecError("third_quantize expects a bosonic spec")
    if check:
        report = validate_spec(spec)
        if not report.passed:
            raise SpecError(str(report))
    L, P, C = spec.L, spec.P, spec.C
    H_eff = spec.H - 0.5j * (L - P)
    K_eff = spec.K - 0.5j * (C - C.T)
    N = L + P
    Q = 0.5 * (C + C.T)
    gap = N - 1j * (H_eff - H_eff.conj().T)
    low = np.linalg.eigvalsh(0.5 * (gap + gap.conj().T)).min()
    if low < -TAU_PSD:
        raise NoiseInequalityError(f"dissipation exceeds noise by {-low:.3e}")
    return ThirdQuantizedBoson(H_eff, K_eff, N, Q)


def _require_u1(tq):
    if not tq.u1_symmetric:
        raise U1BreakingError(
            "pairing terms K_eff or Q are non-zero; only the U(1)-symmetric sector is handled analytically"
        )


def _stability_margin(H_eff):
    return float(np.linalg.eigvals(H_eff).imag.max())


def _require_stable(H_eff):
    margin = _stability_margin(H_eff)
    if margin >= -TAU_STAB:
        raise InstabilityError(f"no steady state: max Im(E) = {margin:.3e}")


def solve_steady_covariance(tq):
    """Steady-state ``S_ss`` from ``H_eff S - S H_eff^dagger + i N = 0``."""
    _require_u1(tq)
    _require_stable(tq.H_eff)
    return _linalg.solve_lyapunov(tq.H_eff, tq.N)


def spectral_data(tq):
    _require_u1(tq)
    S_ss = solve_steady_covariance(tq)
    E, PsiR, PsiL, cond = _linalg.biorthogonal_eig(tq.H_eff)
    return SpectralData(E, PsiR, PsiL, S_ss, cond)


def liouvillian_eigenvalue(E, mu, nu):
    """``sum_s (E_s mu_s - conj(E_s) nu_s)``."""
    E = np.atleast_1d(np.asarray(E, dtype=complex))
    mu = np.asarray(mu)
    nu = np.asarray(nu)
    if mu.shape != E.shape or nu.shape != E.shape:
        raise ValueError("excitation lists must have one entry per mode")
    return complex(np.sum(E * mu) - np.sum(E.conj() * nu))


def _compositions(total, parts):
    """All tuples of ``parts`` non-negative integers summing to at most ``total``."""
    if parts == 0:
        yield ()
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _count_indices(max_excitations, parts):
    from math import comb
    return comb(max_excitations + parts, parts)


def sort_spectrum(entries):
    """Ascending |Im|, then ascending Re, then lexicographic index."""
    return sorted(entries, key=lambda item: (abs(item[1].imag), item[1].real, item[0]))


def enumerate_spectrum(E, max_excitations, cap=SPECTRUM_CAP):
    """Lindbladian eigenvalues for all excitations with ``sum(mu + nu) <= max_excitations``.

    Returns
    -------
    list of ((mu, nu), complex)
        ``mu`` and ``nu`` are tuples; sorted as in :func:`sort_spectrum`.
    """
    if max_excitations < 0:
        raise ValueError("max_excitations must be non-negative")
    E = np.atleast_1d(np.asarray(E, dtype=complex))
    M = len(E)
    count = _count_indices(max_excitations, 2 * M)
    if count > cap:
        raise CapacityError(f"{count} spectral indices exceed the cap of {cap}")
    entries = []
    for combo in _compositions(max_excitations, 2 * M):
        mu, nu = combo[:M], combo[M:]
        entries.append(((mu, nu), liouvillian_eigenvalue(E, mu, nu)))
    return sort_spectrum(entries)


def evolve_covariance(tq, S0, t):
    """``S(t)`` from the Lyapunov-type equation of motion.

    Computed as ``U S0 U^dagger + int_0^t U(s) N U(s)^dagger ds`` with
    ``U(s) = exp(-i H_eff s)``. For stable ``H_eff`` this equals
    ``U (S0 - S_ss) U^dagger + S_ss``; marginal modes are allowed at finite t.
    """
    _require_u1(tq)
    if t < 0:
        raise ValueError("t must be non-negative")
    margin = _stability_margin(tq.H_eff)
    if margin > TAU_STAB:
        raise InstabilityError(f"covariance grows without bound: max Im(E) = {margin:.3e}")
    S0 = np.asarray(S0, dtype=complex)
    prop, noise = _linalg.driven_integral(tq.H_eff, tq.N, t)
    S = prop @ S0 @ prop.conj().T + noise
    return 0.5 * (S + S.conj().T)


@dataclass(frozen=True, eq=False)
class QuasiparticleTable:
    """Mode-space coefficients of the quasiparticle superoperators.

    Row ``s`` of each array gives the coefficients of one quasiparticle
    operator on the mode superoperators:

    - ``a_cl(s)       = cl[s] . a_cl  + cl_q[s] . a_q``
    - ``a_cl^dag(s)   = cldag[s] . a_cl^dag + cldag_q[s] . a_q^dag``
    - ``a_q(s)        = q[s] . a_q``
    - ``a_q^dag(s)    = qdag[s] . a_q^dag``
    """

    cl: np.ndarray
    cl_q: np.ndarray
    cldag: np.ndarray
    cldag_q: np.ndarray
    q: np.ndarray
    qdag: np.ndarray


def quasiparticle_coefficients(sd):
    _linalg.require_diagonalizable(sd.condition)
    PsiL, PsiR, S = sd.PsiL, sd.PsiR, sd.S_ss
    return QuasiparticleTable(
        cl=PsiL.copy(),
        cl_q=PsiL @ S,
        cldag=PsiL.conj(),
        cldag_q=-(PsiL.conj() @ S.T),
        q=PsiR.T.conj(),
        qdag=PsiR.T.copy(),
    )


def commutator_matrices(table):
    """Commutators between quasiparticle operators from the canonical relations.

    The mode superoperators obey ``[a_cl,m, a_q,n^dag] = delta_mn`` and
    ``[a_cl,m^dag, a_q,n] = -delta_mn`` with all other pairs commuting.

    Returns a dict of M x M matrices keyed by operator pair; the canonical
    ones (``"cl,qdag"`` and ``"cldag,-q"``) should be the identity and the rest zero.
    """
    # Operator represented by its coefficient vectors on (a_cl, a_cl^dag, a_q, a_q^dag).
    def ops(t):
        zero = np.zeros_like(t.cl)
        return {
            "cl": (t.cl, zero, t.cl_q, zero),
            "cldag": (zero, t.cldag, zero, t.cldag_q),
            "q": (zero, zero, t.q, zero),
            "qdag": (zero, zero, zero, t.qdag),
        }

    def comm(A, B):
        a_cl, a_cld, a_q, a_qd = A
        b_cl, b_cld, b_q, b_qd = B
        return a_cl @ b_qd.T - a_qd @ b_cl.T - a_cld @ b_q.T + a_q @ b_cld.T

    o = ops(table)
    out = {}
    names = list(o)
    for i, x in enumerate(names):
        for y in names[i:]:
            out[f"{x},{y}"] = comm(o[x], o[y])
    out["cldag,-q"] = -out["cldag,q"]
    return out


def gaussian_kernel(tq, eta, alpha, t):
    """Mixed phase-space kernel ``K(eta, alpha; t)`` of a U(1)-symmetric model.

    ``K = exp(-eta^dag G(t) eta + eta^dag U alpha - alpha^dag U^dag eta)`` with
    ``U = exp(-i H_eff t)`` and ``G(t) = int_0^t U(s) N U(s)^dag ds`` the
    equal-time Keldysh function (step function taken as 1 at coinciding times).

    ``eta`` and ``alpha`` may carry leading batch dimensions; the last axis
    runs over modes.
    """
    _require_u1(tq)
    if t < 0:
        raise ValueError("t must be non-negative")
    eta = np.asarray(eta, dtype=complex)
    alpha = np.asarray(alpha, dtype=complex)
    M = tq.modes
    if M == 1:
        # single mode: accept scalars or arrays of sample points
        if eta.shape[-1:] != (1,):
            eta = eta[..., None]
        if alpha.shape[-1:] != (1,):
            alpha = alpha[..., None]
    prop, G = _linalg.driven_integral(tq.H_eff, tq.N, t)
    quad = np.einsum("...m,mn,...n->...", eta.conj(), G, eta)
    cross = np.einsum("...m,mn,...n->...", eta.conj(), prop, alpha)
    out = np.exp(-quad.real + 2j * cross.imag)
    return complex(out) if out.ndim == 0 else out
