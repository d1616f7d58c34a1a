"""Exact dynamics of the thermally damped Kerr oscillator.

Model: ``H = omega0 a^dag a + (U/2) a^dag a^dag a a`` with loss ``kappa (nth+1)``
and pump ``kappa nth``. Every quantity is a bilateral series over the
angular harmonic ``l`` whose coefficients depend on

    Gamma_l = sqrt(kappa^2 - U^2 l^2 + 2 i kappa U l (2 nth + 1)).

Coefficients are written through ``cosh(Gamma_l t/2)`` and
``sinh(Gamma_l t/2)/Gamma_l``, both even in ``Gamma_l``, so the square-root
branch never matters and ``Gamma_l = 0`` needs no special case.

Phase-space variables follow the sqrt2-scaled convention of
:mod:`lindblad3q.phasespace`.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import jve

from .errors import SeriesNonConvergence
from .phasespace import PhaseGrid, _interpolate
from .special import bessel_j_complex


@dataclass(frozen=True)
class KerrModel:
    omega0: float
    U: float
    kappa: float
    nth: float

    def __post_init__(self):
        if self.kappa < 0 or self.nth < 0:
            raise ValueError("kappa and nth must be non-negative")

    @property
    def width(self):
        return 2 * self.nth + 1


@dataclass(frozen=True)
class SeriesControl:
    """Truncation policy: stop after three consecutive harmonics below ``term_tol``,
    or at ``|l| = l_max``."""

    l_max: int = 80
    term_tol: float = 1e-14

    def __post_init__(self):
        if self.l_max < 0 or self.term_tol <= 0:
            raise ValueError("need l_max >= 0 and term_tol > 0")


DEFAULT_CONTROL = SeriesControl()


@dataclass(frozen=True)
class KerrCoefficients:
    """All coefficient families for one harmonic ``l`` at one time ``t``."""

    l: int
    t: float
    Gamma: complex
    A: complex
    Bq: complex
    Bcl: complex
    D: complex
    Eplus: complex
    Eminus: complex
    F: complex
    P: complex
    Q: complex
    R: complex
    S: complex


def gamma_l(model, l):
    """Principal square root ``sqrt(kappa^2 - U^2 l^2 + 2 i kappa U l (2 nth + 1))``."""
    k, U = model.kappa, model.U
    return complex(np.sqrt(complex(k * k - (U * l) ** 2, 2 * k * U * l * model.width)))


def _cosh_sinhc(gamma, t):
    """``cosh(gamma t/2)`` and ``sinh(gamma t/2)/gamma`` (finite at gamma = 0)."""
    x = gamma * t / 2
    if abs(x) < 1e-4:
        x2 = x * x
        return np.cosh(x), (t / 2) * (1 + x2 / 6 + x2 * x2 / 120)
    return np.cosh(x), np.sinh(x) / gamma


def kerr_coefficients(model, l, t, gamma=None):
    """Coefficient families for harmonic ``l`` at time ``t``.

    ``gamma`` overrides ``Gamma_l`` (used to check invariance under ``Gamma -> -Gamma``).
    Families whose denominator vanishes (the propagator family at
    ``kappa = 0`` or ``t = 0``) come back as ``nan``.
    """
    G = gamma_l(model, l) if gamma is None else complex(gamma)
    k, U, w, n = model.kappa, model.U, model.width, model.nth
    c, sc = _cosh_sinhc(G, t)
    phase = np.exp(-1j * (model.omega0 - U) * l * t + k * t / 2)
    iul = 1j * U * l
    # kernel family
    den = c + k * sc
    A = 1 / den
    Bq = (iul + 2 * k * w) * sc / den
    Bcl = iul * sc / den
    # propagator family
    X = (iul + 2 * k * w) * sc
    with np.errstate(divide="ignore", invalid="ignore"):
        inv_x = 1 / X if X != 0 else complex("nan")
    D = 2 * phase * (1j) ** (-l) * inv_x
    Eplus = (c + k * sc) * inv_x
    Eminus = (c - k * sc) * inv_x
    F = 1j * inv_x
    # coherent-state family
    Y = c + (iul + k * (4 * n + 1)) * sc
    P = 2 * phase * (1j) ** (-l) / Y
    Q = (c + (iul + k) * sc) / Y
    R = (c - k * sc) / Y
    S = 1j / Y
    return KerrCoefficients(l, t, G, *(complex(v) for v in (A, Bq, Bcl, D, Eplus, Eminus, F, P, Q, R, S)))


def _bilateral_sum(term, ctrl):
    """Sum ``term(l)`` over integer ``l`` with the truncation policy of ``ctrl``.

    Returns the sum and the magnitude of the last harmonic pair added.
    """
    total = np.array(term(0), dtype=complex)
    mag = float(np.max(np.abs(total), initial=0.0))
    quiet = 0
    for l in range(1, ctrl.l_max + 1):
        plus = term(l)
        minus = term(-l)
        total = total + plus + minus
        mag = float(max(np.max(np.abs(plus), initial=0.0), np.max(np.abs(minus), initial=0.0)))
        quiet = quiet + 1 if mag < ctrl.term_tol else 0
        if quiet >= 3:
            return total, mag
    if ctrl.l_max > 0 and mag >= ctrl.term_tol:
        raise SeriesNonConvergence(mag, ctrl.l_max)
    return total, mag


def _scalar(value):
    value = np.asarray(value)
    return complex(value) if value.ndim == 0 else value


def kerr_kernel(model, eta, alpha, t, ctrl=DEFAULT_CONTROL, full_output=False):
    """Mixed kernel ``K(eta, alpha; t)`` as a Bessel series.

    Term ``l``: ``e^{-i(omega0-U) l t + kappa t/2} A_l e^{-Bq_l |eta|^2 - Bcl_l |alpha|^2}
    e^{-i l (arg eta - arg alpha)} J_l(2 |eta| |alpha| A_l)``.
    """
    if t < 0:
        raise ValueError("t must be non-negative")
    eta = np.asarray(eta, dtype=complex)
    alpha = np.asarray(alpha, dtype=complex)
    reta, ralpha = np.abs(eta), np.abs(alpha)
    rel = np.exp(-1j * (np.angle(eta) - np.angle(alpha)))

    def term(l):
        c = kerr_coefficients(model, l, t)
        pre = np.exp(-1j * (model.omega0 - model.U) * l * t + model.kappa * t / 2)
        return (pre * c.A * np.exp(-c.Bq * reta**2 - c.Bcl * ralpha**2)
                * rel ** l * bessel_j_complex(l, 2 * reta * ralpha * c.A))

    total, tail = _bilateral_sum(term, ctrl)
    return (_scalar(total), tail) if full_output else _scalar(total)


def _coherent_mixing(model, l, t):
    """``A_l/(1 + Bcl_l)``, ``Bcl_l/(1 + Bcl_l)`` and ``Bq_l + A_l^2/(1 + Bcl_l)``.

    Integrating the kernel against ``2 e^{-|alpha - alpha0|^2}`` only needs
    these three ratios. Each of ``A_l``, ``Bcl_l`` diverges where
    ``cosh + kappa sinhc`` vanishes (``kappa = 0``, ``U l t = pi`` mod ``2 pi``),
    but the ratios do not: with ``Z = cosh + (kappa + i U l) sinhc`` and
    ``cosh^2 - Gamma^2 sinhc^2 = 1`` they are ``1/Z``, ``i U l sinhc/Z`` and
    ``(cosh + (i U l + kappa (4 nth + 1)) sinhc)/Z``.
    """
    c, sc = _cosh_sinhc(gamma_l(model, l), t)
    iul = 1j * model.U * l
    Z = c + (model.kappa + iul) * sc
    return 1 / Z, iul * sc / Z, (c + (iul + model.kappa * (4 * model.nth + 1)) * sc) / Z


def kerr_average_a(model, alpha0, t, ctrl=DEFAULT_CONTROL):
    """``<a(t)>`` for the coherent initial Wigner function ``2 e^{-|alpha - alpha0|^2}``.

    Only the first harmonic contributes. With ``b = Bcl_1(t)`` the phase-space
    moment is the Gaussian integral
    ``int d^2a/(2 pi) a e^{-b|a|^2} 2 e^{-|a - alpha0|^2} = alpha0 e^{-|alpha0|^2 b/(1+b)} / (1+b)^2``,
    so ``sqrt2 <a(t)> = e^{-i(omega0-U)t + kappa t/2} (A_1/(1+b))^2 alpha0 e^{-|alpha0|^2 b/(1+b)}``.

    ``t`` may be a scalar or an array. ``ctrl`` is accepted for interface
    symmetry; no truncation is involved.
    """
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(ts < 0):
        raise ValueError("t must be non-negative")
    out = np.empty(ts.shape, dtype=complex)
    for k, tk in enumerate(ts):
        ratio, damp, _ = _coherent_mixing(model, 1, tk)
        pre = np.exp(-1j * (model.omega0 - model.U) * tk + model.kappa * tk / 2)
        out[k] = pre * ratio**2 * alpha0 * np.exp(-abs(alpha0) ** 2 * damp) / np.sqrt(2)
    return complex(out[0]) if np.ndim(t) == 0 else out


def kerr_characteristic_coherent(model, eta, alpha0, t, ctrl=DEFAULT_CONTROL):
    """``Lambda_t(eta)`` for the coherent initial state, the kernel integrated in closed form.

    With ``p_l = 1 + Bcl_l``, term ``l`` is
    ``e^{-i(omega0-U) l t + kappa t/2} (A_l/p_l) e^{-(Bq_l + A_l^2/p_l)|eta|^2 - |alpha0|^2 Bcl_l/p_l}
    e^{-i l (arg eta - arg alpha0)} J_l(2 |eta| |alpha0| A_l/p_l)``.
    """
    if t < 0:
        raise ValueError("t must be non-negative")
    eta = np.asarray(eta, dtype=complex)
    reta = np.abs(eta)
    r0 = abs(alpha0)
    rel = np.exp(-1j * (np.angle(eta) - np.angle(alpha0)))

    def term(l):
        ratio, damp, width = _coherent_mixing(model, l, t)
        pre = np.exp(-1j * (model.omega0 - model.U) * l * t + model.kappa * t / 2)
        return (pre * ratio * np.exp(-width * reta**2 - r0**2 * damp)
                * rel ** l * bessel_j_complex(l, 2 * reta * r0 * ratio))

    return _scalar(_bilateral_sum(term, ctrl)[0])


def kerr_wigner_propagator(model, beta, alpha, t, ctrl=DEFAULT_CONTROL):
    """Classical-classical propagator ``Xi(beta, alpha; t)``.

    Term ``l``: ``D_l e^{-E+_l |beta|^2 - E-_l |alpha|^2} e^{-i l (arg beta - arg alpha)}
    J_l(2 |beta| |alpha| F_l)``; ``E+`` multiplies the final point ``beta``.
    Requires ``kappa > 0`` and ``t > 0`` (otherwise the propagator is a distribution).
    """
    if t <= 0 or model.kappa <= 0:
        raise ValueError("the Wigner propagator is a distribution unless kappa > 0 and t > 0")
    beta = np.asarray(beta, dtype=complex)
    alpha = np.asarray(alpha, dtype=complex)
    rb, ra = np.abs(beta), np.abs(alpha)
    rel = np.exp(-1j * (np.angle(beta) - np.angle(alpha)))

    def term(l):
        c = kerr_coefficients(model, l, t)
        return (c.D * np.exp(-c.Eplus * rb**2 - c.Eminus * ra**2) * rel ** l
                * bessel_j_complex(l, 2 * rb * ra * c.F))

    return _scalar(_bilateral_sum(term, ctrl)[0])


def kerr_wigner_coherent(model, alpha, alpha0, t, ctrl=DEFAULT_CONTROL, full_output=False):
    """Wigner function at time ``t`` for the initial state ``W_0 = 2 e^{-|alpha - alpha0|^2}``.

    Term ``l``: ``P_l e^{-Q_l |alpha|^2 - R_l |alpha0|^2} e^{-i l (arg alpha - arg alpha0)}
    J_l(2 |alpha| |alpha0| S_l)``. The result is real up to rounding and
    returned as a real array.
    """
    if t < 0:
        raise ValueError("t must be non-negative")
    alpha = np.asarray(alpha, dtype=complex)
    ra, r0 = np.abs(alpha), abs(alpha0)
    rel = np.exp(-1j * (np.angle(alpha) - np.angle(alpha0)))

    def term(l):
        c = kerr_coefficients(model, l, t)
        return (c.P * np.exp(-c.Q * ra**2 - c.R * r0**2) * rel ** l
                * bessel_j_complex(l, 2 * ra * r0 * c.S))

    total, tail = _bilateral_sum(term, ctrl)
    imag = float(np.max(np.abs(np.imag(total)), initial=0.0))
    if imag > 1e-9:
        warnings.warn(f"Wigner series has imaginary residue {imag:.1e}", stacklevel=2)
    value = np.real(total)
    value = float(value) if np.ndim(value) == 0 else value
    return (value, tail) if full_output else value


def evolve_wigner_grid(model, grid0, t, ctrl=DEFAULT_CONTROL, radial_nodes=160, angular_nodes=256):
    """Propagate an arbitrary Wigner grid with the Kerr propagator.

    The quadrature ``int d^2 a/(2 pi) Xi(beta, a; t) W_0(a)`` is done in polar
    coordinates: angular harmonics ``c_l(r)`` of ``W_0`` (spline interpolation
    onto a polar mesh plus FFT) reduce it to one radial Gauss-Legendre
    integral per harmonic,

        W_t(beta) = sum_l D_l e^{-E+_l |beta|^2} e^{-i l arg beta}
                    int r dr e^{-E-_l r^2} J_l(2 |beta| r F_l) c_l(r),

    evaluated on a fine radial mesh and spline-interpolated to the output points.
    The integration disc is the largest one inscribed in the input grid.
    """
    if t <= 0 or model.kappa <= 0:
        raise ValueError("grid propagation needs kappa > 0 and t > 0")
    R = min(abs(grid0.re[0]), abs(grid0.re[-1]), abs(grid0.im[0]), abs(grid0.im[-1]))
    x, wts = np.polynomial.legendre.leggauss(radial_nodes)
    r = 0.5 * R * (x + 1)
    wts = 0.5 * R * wts
    phis = 2 * np.pi * np.arange(angular_nodes) / angular_nodes
    polar = r[:, None] * np.exp(1j * phis[None, :])
    samples = _interpolate(grid0, polar)
    harmonics = np.fft.ifft(samples, axis=1)  # column l holds c_l(r)

    out_pts = grid0.points
    rho_out = np.abs(out_pts)
    rel_out = np.exp(-1j * np.angle(out_pts))
    rho_mesh = np.linspace(0, rho_out.max(), max(400, 2 * max(out_pts.shape)))

    def term(l):
        if abs(l) >= angular_nodes // 2:
            return np.zeros(out_pts.shape, complex)
        c = kerr_coefficients(model, l, t)
        c_l = harmonics[:, l % angular_nodes]
        z = 2 * c.F * rho_mesh[:, None] * r[None, :]
        # the Bessel growth e^{|Im z|} is folded into the Gaussian exponent to avoid overflow
        expo = np.abs(z.imag) - c.Eminus * r[None, :] ** 2 - c.Eplus * rho_mesh[:, None] ** 2
        g = c.D * (jve(l, z) * np.exp(expo) * (r * wts * c_l)[None, :]).sum(axis=1)
        spline_re = CubicSpline(rho_mesh, g.real)
        spline_im = CubicSpline(rho_mesh, g.imag)
        return (spline_re(rho_out) + 1j * spline_im(rho_out)) * rel_out ** l

    total, _ = _bilateral_sum(term, ctrl)
    out = PhaseGrid(grid0.re, grid0.im, total.real.astype(complex), dict(grid0.meta, t=t))
    drift = abs(out.integral() - grid0.integral())
    if drift > 1e-3:
        warnings.warn(f"normalization drift {drift:.1e} during Kerr grid propagation", stacklevel=2)
    return out
