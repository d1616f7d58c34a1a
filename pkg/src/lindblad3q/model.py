"""Quadratic Lindbladian specifications.

A spec holds the mode Hamiltonian ``H``, the pairing matrix ``K`` and the
bath couplings. Each bath ``b`` contributes the jump operator
``X_b = sum_m l[b, m] a_m + conj(p[b, m]) a_m^dagger``; the dynamics only
depend on the bilinears

    L[n, m] = sum_b conj(l[b, n]) l[b, m]
    P[n, m] = sum_b conj(p[b, n]) p[b, m]
    C[n, m] = sum_b conj(l[b, n]) conj(p[b, m])

so a spec can be given either through ``(l, p)`` or directly through
``(L, P, C)``.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import SpecError

TAU_HERM = 1e-10
TAU_PSD = 1e-10

STATISTICS = ("boson", "fermion")


@dataclass(frozen=True, eq=False)
class DissipatorMatrices:
    L: np.ndarray
    P: np.ndarray
    C: np.ndarray


def build_dissipator_matrices(l, p):
    """Loss, pump and cross matrices from bath couplings.

    Parameters
    ----------
    l, p : array_like, shape (B, M)
        Loss and pump couplings of each bath to each mode.

    Returns
    -------
    DissipatorMatrices
    """
    l = np.atleast_2d(np.asarray(l, dtype=complex))
    p = np.atleast_2d(np.asarray(p, dtype=complex))
    if l.shape != p.shape:
        raise SpecError(f"l and p must have the same shape, got {l.shape} and {p.shape}")
    L = l.conj().T @ l
    P = p.conj().T @ p
    C = l.conj().T @ p.conj()
    # exact Hermiticity; the products above are Hermitian only up to rounding
    L = 0.5 * (L + L.conj().T)
    P = 0.5 * (P + P.conj().T)
    return DissipatorMatrices(L, P, C)


def _as_square(name, value, modes):
    arr = np.asarray(value, dtype=complex)
    if arr.ndim == 0 and modes == 1:
        arr = arr.reshape(1, 1)
    if arr.shape != (modes, modes):
        raise SpecError(f"{name} must be {modes}x{modes}, got shape {arr.shape}")
    return arr


@dataclass(frozen=True, eq=False)
class QuadraticLindbladSpec:
    """Quadratic bosonic or fermionic master equation.

    Build instances with :meth:`from_couplings` or :meth:`from_dissipators`.
    ``l`` and ``p`` are ``None`` when the spec was given through ``(L, P, C)``.
    """

    statistics: str
    H: np.ndarray
    K: np.ndarray
    dissipators: DissipatorMatrices
    l: np.ndarray | None = None
    p: np.ndarray | None = None
    _hash: str = field(default="", repr=False)

    @classmethod
    def from_couplings(cls, statistics, H, l, p, K=None):
        H = np.atleast_2d(np.asarray(H, dtype=complex))
        modes = H.shape[0]
        l = np.asarray(l, dtype=complex).reshape(-1, modes)
        p = np.asarray(p, dtype=complex).reshape(-1, modes)
        diss = build_dissipator_matrices(l, p)
        return cls._make(statistics, H, K, diss, l, p)

    @classmethod
    def from_dissipators(cls, statistics, H, L, P, C=None, K=None):
        H = np.atleast_2d(np.asarray(H, dtype=complex))
        modes = H.shape[0]
        L = _as_square("L", L, modes)
        P = _as_square("P", P, modes)
        C = np.zeros((modes, modes), complex) if C is None else _as_square("C", C, modes)
        return cls._make(statistics, H, K, DissipatorMatrices(L, P, C), None, None)

    @classmethod
    def _make(cls, statistics, H, K, diss, l, p):
        if statistics not in STATISTICS:
            raise SpecError(f"statistics must be one of {STATISTICS}, got {statistics!r}")
        modes = H.shape[0]
        H = _as_square("H", H, modes)
        K = np.zeros((modes, modes), complex) if K is None else _as_square("K", K, modes)
        spec = cls(statistics, H, K, diss, l, p)
        object.__setattr__(spec, "_hash", _hash_dict(spec_to_dict(spec)))
        return spec

    @property
    def modes(self):
        return self.H.shape[0]

    @property
    def baths(self):
        return None if self.l is None else self.l.shape[0]

    @property
    def L(self):
        return self.dissipators.L

    @property
    def P(self):
        return self.dissipators.P

    @property
    def C(self):
        return self.dissipators.C

    @property
    def is_u1_symmetric(self):
        return not (np.any(self.K) or np.any(self.C))

    def model_hash(self):
        """SHA-256 of the canonical JSON form (stable across save/load)."""
        return self._hash


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)

    @property
    def passed(self):
        return not self.violations

    def add(self, name, residual):
        self.violations.append((name, float(residual)))

    def __str__(self):
        if self.passed:
            return "spec valid"
        return "; ".join(f"{name}: residual {res:.3e}" for name, res in self.violations)


def _min_eig(herm):
    return float(np.linalg.eigvalsh(0.5 * (herm + herm.conj().T)).min())


def validate_spec(spec, tol_herm=TAU_HERM, tol_psd=TAU_PSD):
    """Check Hermiticity, (anti)symmetry of K and positivity of L, P.

    Never raises; every violated invariant is listed with its residual.
    """
    report = ValidationReport()
    res = np.linalg.norm(spec.H - spec.H.conj().T)
    if res > tol_herm:
        report.add("H hermiticity", res)
    if spec.statistics == "boson":
        res = np.linalg.norm(spec.K - spec.K.T)
        if res > tol_herm:
            report.add("K symmetry", res)
    else:
        res = np.linalg.norm(spec.K + spec.K.T)
        if res > tol_herm:
            report.add("K antisymmetry", res)
    for name, mat in (("L", spec.L), ("P", spec.P)):
        res = np.linalg.norm(mat - mat.conj().T)
        if res > tol_herm:
            report.add(f"{name} hermiticity", res)
        low = _min_eig(mat)
        if low < -tol_psd:
            report.add(f"{name} positivity", -low)
    return report


def single_mode_boson(omega0, kappa, nth):
    """Thermally damped oscillator: loss ``kappa (nth + 1)``, pump ``kappa nth``, no cross term.

    Built from the dissipator matrices directly, so ``L - P`` carries no
    square-root round-off.
    """
    return QuadraticLindbladSpec.from_dissipators("boson", [[omega0]], L=[[kappa * (nth + 1)]],
                                                  P=[[kappa * nth]])


def single_mode_fermion(eps0, gamma, nth):
    """Fermionic level with loss ``gamma (1 - nth)`` and pump ``gamma nth``, no cross term."""
    return QuadraticLindbladSpec.from_dissipators("fermion", [[eps0]], L=[[gamma * (1 - nth)]],
                                                  P=[[gamma * nth]])


# -- serialization -----------------------------------------------------------

def _encode(mat):
    mat = np.asarray(mat, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in mat]


def _decode(name, value):
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise SpecError(f"{name}: expected nested [re, im] pairs") from exc
    if arr.ndim != 3 or arr.shape[-1] != 2:
        raise SpecError(f"{name}: expected a matrix of [re, im] pairs, got shape {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]


def spec_to_dict(spec):
    doc = {"statistics": spec.statistics, "modes": spec.modes, "H": _encode(spec.H)}
    if np.any(spec.K):
        doc["K"] = _encode(spec.K)
    if spec.l is not None:
        doc["l"] = _encode(spec.l)
        doc["p"] = _encode(spec.p)
    else:
        doc["L"] = _encode(spec.L)
        doc["P"] = _encode(spec.P)
        doc["C"] = _encode(spec.C)
    return doc


def spec_from_dict(doc):
    try:
        statistics = doc["statistics"]
        modes = int(doc["modes"])
        H = _decode("H", doc["H"])
    except KeyError as exc:
        raise SpecError(f"model file missing field {exc}") from exc
    if H.shape != (modes, modes):
        raise SpecError(f"H shape {H.shape} does not match modes={modes}")
    K = _decode("K", doc["K"]) if "K" in doc else None
    if "l" in doc or "p" in doc:
        if "l" not in doc or "p" not in doc:
            raise SpecError("couplings need both 'l' and 'p'")
        return QuadraticLindbladSpec.from_couplings(
            statistics, H, _decode("l", doc["l"]), _decode("p", doc["p"]), K=K
        )
    if "L" not in doc or "P" not in doc:
        raise SpecError("model file needs either (l, p) or (L, P, C)")
    C = _decode("C", doc["C"]) if "C" in doc else None
    return QuadraticLindbladSpec.from_dissipators(
        statistics, H, _decode("L", doc["L"]), _decode("P", doc["P"]), C=C, K=K
    )


def _hash_dict(doc):
    blob = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def dump_model(spec, path):
    Path(path).write_text(json.dumps(spec_to_dict(spec), indent=1, sort_keys=True) + "\n")


def load_model(path):
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SpecError(f"{path}: invalid JSON ({exc})") from exc
    return spec_from_dict(doc)
