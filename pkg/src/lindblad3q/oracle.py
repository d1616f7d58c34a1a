"""Brute-force reference: vectorized Liouvillians in truncated Fock space.

Density matrices are vectorized by stacking columns, so ``A rho B`` becomes
``kron(B.T, A) @ vec(rho)``. The generator follows ``i d rho/dt = L rho``;
evolution is therefore ``expm(-1j * L * t)``.

Superoperator matrices are stored sparse: a 60-level Kerr oscillator already
has 3600 x 3600 entries, and the two-mode covariance checks reach 390625.
``FockLiouvillian.dense()`` is available for eigensolves.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from math import factorial

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.special import eval_genlaguerre, gammaln

from .errors import CapacityError, HeadroomError

DIM_CAP = 256
FERMION_MODE_CAP = 8


def vec(rho):
    return np.asarray(rho).reshape(-1, order="F")


def unvec(v, dim):
    return np.asarray(v).reshape(dim, dim, order="F")


@dataclass(eq=False)
class FockLiouvillian:
    """Sparse matrix of the generator acting on column-stacked density matrices."""

    matrix: sp.csr_matrix
    dims: tuple
    statistics: str = "boson"

    @property
    def D(self):
        return int(np.prod(self.dims))

    def dense(self):
        return self.matrix.toarray()

    def apply(self, rho):
        return unvec(self.matrix @ vec(rho), self.D)

    def trace_residual(self):
        """Norm of ``Tr(L X)`` over all X; zero for a trace-preserving generator."""
        D = self.D
        trace_row = np.zeros(D * D)
        trace_row[:: D + 1] = 1.0
        return float(np.linalg.norm(self.matrix.T @ trace_row))


# -- mode operators ------------------------------------------------------------

def _destroy(n):
    return sp.diags(np.sqrt(np.arange(1, n)), 1, shape=(n, n), format="csr", dtype=complex)


def boson_annihilators(dims):
    """Sparse annihilation operators of each mode in the tensor-product space."""
    dims = tuple(int(d) for d in dims)
    ops = []
    for k, n in enumerate(dims):
        factors = [sp.identity(d, dtype=complex, format="csr") for d in dims]
        factors[k] = _destroy(n)
        op = factors[0]
        for f in factors[1:]:
            op = sp.kron(op, f, format="csr")
        ops.append(op)
    return ops


def fermion_annihilators(modes):
    """Jordan-Wigner annihilators; basis state bit 1 means occupied."""
    lower = sp.csr_matrix(np.array([[0, 1], [0, 0]], dtype=complex))
    parity = sp.csr_matrix(np.diag([1.0, -1.0]).astype(complex))
    eye = sp.identity(2, dtype=complex, format="csr")
    ops = []
    for k in range(modes):
        factors = [parity] * k + [lower] + [eye] * (modes - k - 1)
        op = factors[0]
        for f in factors[1:]:
            op = sp.kron(op, f, format="csr")
        ops.append(op)
    return ops


def _hamiltonian_operator(H, K, ops):
    D = ops[0].shape[0]
    Hop = sp.csr_matrix((D, D), dtype=complex)
    M = len(ops)
    for n in range(M):
        for m in range(M):
            if H[n, m] != 0:
                Hop = Hop + H[n, m] * (ops[n].conj().T @ ops[m])
            if K[n, m] != 0:
                pair = ops[n].conj().T @ ops[m].conj().T
                Hop = Hop + 0.5 * (K[n, m] * pair + np.conj(K[n, m]) * pair.conj().T)
    return Hop


def _generator(Hop, ops, L, P, C):
    """Sparse ``L`` with ``L rho = [H, rho] + i * dissipator(rho)``.

    The dissipator is expanded in the bilinears (L, P, C) of the couplings:
    ``L_nm (a_m rho a_n^dag - {a_n^dag a_m, rho}/2)``,
    ``P_nm (a_n^dag rho a_m - {a_m a_n^dag, rho}/2)``,
    ``C_nm (a_m^dag rho a_n^dag - {a_n^dag a_m^dag, rho}/2)`` and its conjugate.
    """
    D = Hop.shape[0]
    eye = sp.identity(D, dtype=complex, format="csr")

    def left(X):
        return sp.kron(eye, X, format="csr")

    def right(X):
        return sp.kron(X.T, eye, format="csr")

    def sandwich(A, B):
        return sp.kron(B.T, A, format="csr")

    def lindblad_pair(A, B, weight):
        # weight * (A rho B - {B A, rho}/2)
        BA = B @ A
        return weight * (sandwich(A, B) - 0.5 * (left(BA) + right(BA)))

    gen = left(Hop) - right(Hop)
    diss = sp.csr_matrix((D * D, D * D), dtype=complex)
    M = len(ops)
    dag = [op.conj().T.tocsr() for op in ops]
    for n in range(M):
        for m in range(M):
            if L[n, m] != 0:
                diss = diss + lindblad_pair(ops[m], dag[n], L[n, m])
            if P[n, m] != 0:
                diss = diss + lindblad_pair(dag[n], ops[m], P[n, m])
            if C[n, m] != 0:
                diss = diss + lindblad_pair(dag[m], dag[n], C[n, m])
                diss = diss + lindblad_pair(ops[n], ops[m], np.conj(C[n, m]))
    return (gen + 1j * diss).tocsr()


def _check_dim(D, cap):
    if cap is not None and D > cap:
        raise CapacityError(f"Hilbert dimension {D} exceeds cap {cap}; pass a larger cap explicitly")


def build_boson_liouvillian(model, dims, cap=DIM_CAP):
    """Oracle generator for a bosonic quadratic spec or a Kerr model.

    Parameters
    ----------
    model : QuadraticLindbladSpec or KerrModel
        Kerr models are recognized by their ``U`` attribute.
    dims : int or sequence of int
        Fock cutoff per mode (levels ``0 .. d-1``).
    cap : int or None
        Largest allowed total Hilbert dimension.
    """
    dims = (int(dims),) if np.isscalar(dims) else tuple(int(d) for d in dims)
    _check_dim(int(np.prod(dims)), cap)
    if hasattr(model, "U"):
        if len(dims) != 1:
            raise ValueError("Kerr model has a single mode")
        (a,) = boson_annihilators(dims)
        ad = a.conj().T
        Hop = model.omega0 * (ad @ a) + 0.5 * model.U * (ad @ ad @ a @ a)
        L = np.array([[model.kappa * (model.nth + 1)]])
        P = np.array([[model.kappa * model.nth]])
        return FockLiouvillian(_generator(Hop.tocsr(), [a], L, P, np.zeros((1, 1))), dims)
    if model.statistics != "boson":
        raise ValueError("use build_fermion_liouvillian for fermionic specs")
    if len(dims) != model.modes:
        raise ValueError(f"need one cutoff per mode ({model.modes})")
    ops = boson_annihilators(dims)
    Hop = _hamiltonian_operator(model.H, model.K, ops)
    return FockLiouvillian(_generator(Hop, ops, model.L, model.P, model.C), dims)


def build_fermion_liouvillian(spec, max_modes=FERMION_MODE_CAP):
    if spec.statistics != "fermion":
        raise ValueError("expected a fermionic spec")
    M = spec.modes
    if M > max_modes:
        raise CapacityError(f"{M} fermionic modes exceed the cap of {max_modes}")
    ops = fermion_annihilators(M)
    Hop = _hamiltonian_operator(spec.H, spec.K, ops)
    return FockLiouvillian(_generator(Hop, ops, spec.L, spec.P, spec.C), (2,) * M, "fermion")


def parity_operator(liou_or_dims):
    dims = getattr(liou_or_dims, "dims", liou_or_dims)
    diag = np.array([1.0])
    for d in dims:
        diag = np.kron(diag, (-1.0) ** np.arange(d))
    return np.diag(diag).astype(complex)


# -- dynamics --------------------------------------------------------------------

def evolve_density(liou, rho0, t):
    """``rho(t)`` for a scalar time, or a list of matrices for a sequence of times.

    Uses the action of the matrix exponential (``expm_multiply``) on the
    vectorized state; times are visited in ascending order and chained.
    """
    scalar = np.isscalar(t)
    times = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(times < 0):
        raise ValueError("times must be non-negative")
    gen = -1j * liou.matrix
    order = np.argsort(times, kind="stable")
    out = [None] * len(times)
    v = vec(np.asarray(rho0, dtype=complex))
    now = 0.0
    for idx in order:
        dt = times[idx] - now
        if dt > 0:
            v = spla.expm_multiply(gen * dt, v)
            now = times[idx]
        out[idx] = unvec(v, liou.D)
    return out[0] if scalar else out


def steady_state(liou):
    """Normalized null vector of the generator (trace fixed to one)."""
    D = liou.D
    A = liou.matrix.tolil(copy=True)
    trace_row = np.zeros(D * D, dtype=complex)
    trace_row[:: D + 1] = 1.0
    A[0, :] = trace_row
    rhs = np.zeros(D * D, dtype=complex)
    rhs[0] = 1.0
    rho = unvec(spla.spsolve(A.tocsc(), rhs), D)
    return 0.5 * (rho + rho.conj().T)


def liouvillian_spectrum(liou):
    return sla.eigvals(liou.dense())


def liouvillian_eigenvalues_near(liou, sigma, count):
    """``count`` eigenvalues closest to ``sigma`` by shift-invert Arnoldi on the sparse generator.

    For cutoffs where a dense eigensolve is too slow; only the slowest
    decaying part of the spectrum is usually needed.
    """
    return spla.eigs(liou.matrix.tocsc(), k=count, sigma=sigma, return_eigenvectors=False)


def expectation(rho, op):
    op = op.toarray() if sp.issparse(op) else np.asarray(op)
    return complex(np.trace(op @ rho))


def symmetric_covariance(rho, dims):
    """``S_mn = <{a_m, a_n^dagger}>`` in a truncated bosonic state."""
    ops = [o.toarray() for o in boson_annihilators(dims)]
    M = len(ops)
    S = np.empty((M, M), dtype=complex)
    for m in range(M):
        for n in range(M):
            S[m, n] = np.trace((ops[m] @ ops[n].conj().T + ops[n].conj().T @ ops[m]) @ rho)
    return S


def antisymmetric_covariance(rho, modes):
    """``A_mn = <[c_m, c_n^dagger]>`` in the Jordan-Wigner space."""
    ops = [o.toarray() for o in fermion_annihilators(modes)]
    A = np.empty((modes, modes), dtype=complex)
    for m in range(modes):
        for n in range(modes):
            A[m, n] = np.trace((ops[m] @ ops[n].conj().T - ops[n].conj().T @ ops[m]) @ rho)
    return A


# -- states ------------------------------------------------------------------------

def fock_state(n, N_c):
    rho = np.zeros((N_c, N_c), dtype=complex)
    rho[n, n] = 1.0
    return rho


def _warn_tail(weights, what):
    if np.sum(weights[-2:]) > 1e-12:
        warnings.warn(f"{what}: population {np.sum(weights[-2:]):.1e} in the top two Fock levels", stacklevel=3)


def coherent_state(alpha0, N_c):
    """Projector on the Fock-space coherent state with amplitude ``alpha0``, renormalized after truncation."""
    n = np.arange(N_c)
    amp = np.zeros(N_c, dtype=complex)
    if alpha0 == 0:
        amp[0] = 1.0
    else:
        logmag = -0.5 * abs(alpha0) ** 2 + n * np.log(abs(alpha0)) - 0.5 * gammaln(n + 1)
        amp = np.exp(logmag) * np.exp(1j * n * np.angle(alpha0))
    _warn_tail(np.abs(amp) ** 2, "coherent state")
    amp /= np.linalg.norm(amp)
    return np.outer(amp, amp.conj())


def thermal_state(nth, N_c):
    n = np.arange(N_c)
    if nth == 0:
        p = (n == 0).astype(float)
    else:
        p = (nth / (nth + 1)) ** n / (nth + 1)
    _warn_tail(p, "thermal state")
    return np.diag(p / p.sum()).astype(complex)


# -- phase-space functions -----------------------------------------------------------

def displacement_operator(gamma, dim, method="laguerre", pad=None):
    """Block ``<m|D(gamma)|n>``, ``m, n < dim``, of ``D = exp(gamma a^dag - conj(gamma) a)``.

    ``method="laguerre"`` evaluates the exact infinite-space matrix elements
    through associated Laguerre polynomials; ``method="expm"`` exponentiates
    the truncated generator in a padded space and keeps the leading block.
    """
    if method == "expm":
        pad = pad if pad is not None else int(abs(gamma) ** 2 + 12 * abs(gamma)) + 40
        a = _destroy(dim + pad).toarray()
        full = sla.expm(gamma * a.conj().T - np.conj(gamma) * a)
        return full[:dim, :dim]
    if method != "laguerre":
        raise ValueError(f"unknown method {method!r}")
    return _displacement_laguerre(np.asarray([gamma]), dim)[0]


def _displacement_laguerre(gammas, dim):
    """Stack of displacement blocks for an array of amplitudes, shape (P, dim, dim)."""
    gammas = np.asarray(gammas, dtype=complex).ravel()
    x = np.abs(gammas) ** 2
    m = np.arange(dim)[:, None]
    n = np.arange(dim)[None, :]
    lo = np.minimum(m, n)
    diff = np.abs(m - n)
    # log of sqrt(lo!/hi!) |gamma|^diff exp(-|gamma|^2/2)
    logpref = 0.5 * (gammaln(lo + 1) - gammaln(np.maximum(m, n) + 1))
    with np.errstate(divide="ignore"):
        logabs = np.log(np.abs(gammas))
    out = np.empty((gammas.size, dim, dim), dtype=complex)
    phase = np.exp(1j * np.angle(gammas))
    for k, g in enumerate(gammas):
        lag = eval_genlaguerre(lo, diff, x[k])
        if g == 0:
            mag = (diff == 0).astype(float) * np.exp(logpref)
        else:
            mag = np.exp(logpref + diff * logabs[k] - 0.5 * x[k])
        # m >= n carries gamma^(m-n); m < n carries (-conj gamma)^(n-m)
        ph = np.where(m >= n, phase[k] ** diff, (-np.conj(phase[k])) ** diff)
        out[k] = mag * ph * lag
    return out


def _support(rho, tol=1e-16):
    mags = np.abs(rho).max(axis=0) + np.abs(rho).max(axis=1)
    nz = np.nonzero(mags > tol * mags.max())[0]
    return int(nz[-1]) + 1 if nz.size else 1


def wigner_numeric(rho, alpha):
    """Wigner function ``W(alpha) = 2 Tr(rho D(sqrt2 alpha) Pi)`` with parity ``Pi``.

    Uses ``D(b) Pi D(b)^dag = D(2b) Pi`` so only the block of the displacement
    operator inside the support of ``rho`` is needed; no truncation error
    beyond that of ``rho`` itself.
    """
    rho = np.asarray(rho, dtype=complex)
    alpha = np.asarray(alpha, dtype=complex)
    n_eff = _support(rho)
    r = rho[:n_eff, :n_eff]
    parity = (-1.0) ** np.arange(n_eff)
    flat = alpha.ravel()
    out = np.empty(flat.size, dtype=complex)
    chunk = 256
    for s in range(0, flat.size, chunk):
        D = _displacement_laguerre(np.sqrt(2) * flat[s:s + chunk], n_eff)
        # Tr(rho D Pi) = sum_mn rho_nm D_mn (-1)^n
        out[s:s + chunk] = 2 * np.einsum("nm,kmn,n->k", r, D, parity)
    out = out.reshape(alpha.shape)
    if np.max(np.abs(out.imag), initial=0.0) < 1e-12 * max(1.0, np.max(np.abs(out.real), initial=0.0)):
        out = out.real
    return out if out.ndim else out[()]


def characteristic_numeric(rho, eta):
    """``Lambda(eta) = Tr(D(sqrt2 eta)^dag rho)``."""
    rho = np.asarray(rho, dtype=complex)
    eta = np.asarray(eta, dtype=complex)
    n_eff = _support(rho)
    r = rho[:n_eff, :n_eff]
    flat = eta.ravel()
    out = np.empty(flat.size, dtype=complex)
    chunk = 256
    for s in range(0, flat.size, chunk):
        D = _displacement_laguerre(np.sqrt(2) * flat[s:s + chunk], n_eff)
        out[s:s + chunk] = np.einsum("kmn,mn->k", D.conj(), r)
    out = out.reshape(eta.shape)
    return out if out.ndim else complex(out[()])


def _gaussian_probe(alpha, width, dim):
    """Operator with Wigner function ``(2/width) exp(-|beta - alpha|^2/width)``.

    ``width < 1`` is narrower than vacuum; the operator is then not positive
    (``ratio < 0``) but still trace one, which is all linear evolution needs.
    """
    ratio = (width - 1) / (width + 1)
    diag = (1 - ratio) * ratio ** np.arange(dim)
    D = displacement_operator(alpha / np.sqrt(2), dim)
    return D @ np.diag(diag) @ D.conj().T


def kernel_numeric(liou, eta, alpha, t, widths=(0.5, 1 / 3)):
    """Mixed kernel ``K(eta, alpha; t)`` of a quadratic model from the Fock-space generator.

    The classical eigenket at ``alpha`` is a delta function in phase space,
    which no truncated operator represents. It is approached through Gaussian
    probes of Wigner width ``s``: for a quadratic generator
    ``log Lambda_t(eta)`` of an evolved probe is affine in ``s``, so two
    widths extrapolate exactly to ``s = 0``. ``eta`` and ``alpha`` hold one
    amplitude per mode.
    """
    eta = np.atleast_1d(np.asarray(eta, dtype=complex))
    alpha = np.atleast_1d(np.asarray(alpha, dtype=complex))
    if eta.shape != (len(liou.dims),) or alpha.shape != eta.shape:
        raise ValueError("need one eta and one alpha per mode")
    shift = None
    for d, e in zip(liou.dims, eta):
        block = displacement_operator(np.sqrt(2) * e, d).conj()
        shift = block if shift is None else np.kron(shift, block)
    values = []
    for width in widths:
        probe = np.array([[1.0 + 0j]])
        for d, a in zip(liou.dims, alpha):
            probe = np.kron(probe, _gaussian_probe(a, width, d))
        rho = evolve_density(liou, probe, t)
        values.append(np.einsum("mn,mn->", shift, rho))
    (s1, s2), (v1, v2) = widths, values
    return complex(v1 * (v1 / v2) ** (s1 / (s2 - s1)))


# -- superoperators built from commutators -----------------------------------------------

_LADDER_KINDS = ("a_cl", "a_q", "a_cl_dag", "a_q_dag")


def apply_superoperator_ladder(X, kind, mode=0, dims=None, headroom_tol=1e-12):
    """Classical/quantum superoperators: ``{a, X}/sqrt2``, ``[a, X]/sqrt2`` and daggered forms.

    ``kind`` is one of ``"a_cl"``, ``"a_q"``, ``"a_cl_dag"``, ``"a_q_dag"``.
    Raises :class:`HeadroomError` when X has weight in the top two Fock
    levels of the acted-on mode, where truncated ladder operators are wrong.
    """
    if kind not in _LADDER_KINDS:
        raise ValueError(f"kind must be one of {_LADDER_KINDS}")
    X = np.asarray(X, dtype=complex)
    dims = (X.shape[0],) if dims is None else tuple(dims)
    if headroom_tol is not None:
        _check_headroom(X, dims, mode, headroom_tol)
    a = boson_annihilators(dims)[mode].toarray()
    op = a if kind in ("a_cl", "a_q") else a.conj().T
    sign = 1.0 if kind in ("a_cl", "a_cl_dag") else -1.0
    return (op @ X + sign * (X @ op)) / np.sqrt(2)


def _check_headroom(X, dims, mode, tol):
    shaped = np.abs(X).reshape(dims + dims)
    n = dims[mode]
    top_rows = np.take(shaped, [n - 2, n - 1], axis=mode)
    top_cols = np.take(shaped, [n - 2, n - 1], axis=len(dims) + mode)
    scale = max(np.abs(X).max(), 1e-300)
    worst = max(top_rows.max(), top_cols.max()) / scale
    if worst > tol:
        raise HeadroomError(f"relative weight {worst:.1e} in the top two levels of mode {mode}")


def right_eigenvector_operator(mu, nu, nth, N_c):
    """Right eigenvector ``(a_q^dag)^mu (-a_q)^nu rho_ss / sqrt(mu! nu!)`` of the damped oscillator."""
    X = thermal_state(nth, N_c)
    for _ in range(nu):
        X = -apply_superoperator_ladder(X, "a_q")
    for _ in range(mu):
        X = apply_superoperator_ladder(X, "a_q_dag")
    return X / np.sqrt(factorial(mu) * factorial(nu))
