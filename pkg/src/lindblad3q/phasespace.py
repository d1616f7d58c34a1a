"""Single-mode phase-space layer.

Conventions (``alpha`` is sqrt2-scaled: a coherent state ``|b>`` sits at
``alpha = sqrt2 * b``):

- Wigner function ``W(alpha) = 2 Tr(Pi D(alpha/sqrt2)^dag rho D(alpha/sqrt2))``,
  normalized as ``int d^2 alpha / (2 pi) W = 1``.
- Characteristic function ``Lambda(eta) = Tr(D(sqrt2 eta)^dag rho)``.
- Fourier pair ``W(alpha) = int (2 d^2 eta / pi) exp(eta alpha* - eta* alpha) Lambda(eta)``
  and ``Lambda(eta) = int (d^2 alpha / 2 pi) exp(eta* alpha - eta alpha*) W(alpha)``.

Grids store values indexed ``[i_re, i_im]`` on uniform axes.
"""
from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field, replace
from math import factorial

import numpy as np
from scipy import ndimage

from .special import laguerre

DEFAULT_EXTENT = 6.0
DEFAULT_RESOLUTION = 161
CONVENTION = "sqrt2-scaled alpha"
ALIASING_THRESHOLD = 1e-8


@dataclass(frozen=True)
class DampedOscillatorParams:
    omega0: float
    kappa: float
    nth: float

    def __post_init__(self):
        if self.kappa < 0 or self.nth < 0:
            raise ValueError("kappa and nth must be non-negative")

    @property
    def width(self):
        return 2 * self.nth + 1


@dataclass(frozen=True, eq=False)
class PhaseGrid:
    """Complex samples on a uniform rectangular grid of ``alpha`` (or ``eta``)."""

    re: np.ndarray
    im: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.values.shape != (self.re.size, self.im.size):
            raise ValueError("values must have shape (len(re), len(im))")

    @property
    def spacing(self):
        return (float(self.re[1] - self.re[0]), float(self.im[1] - self.im[0]))

    @property
    def cell(self):
        d_re, d_im = self.spacing
        return d_re * d_im

    @property
    def points(self):
        return self.re[:, None] + 1j * self.im[None, :]

    def integral(self):
        """``int d^2 alpha / (2 pi)`` of the values (unit trace for a Wigner grid)."""
        return complex(self.values.sum() * self.cell / (2 * np.pi))

    def boundary_max(self):
        v = np.abs(self.values)
        return float(max(v[0].max(), v[-1].max(), v[:, 0].max(), v[:, -1].max()))

    def with_values(self, values, **meta):
        return replace(self, values=np.asarray(values), meta={**self.meta, **meta})


def make_grid(extent=DEFAULT_EXTENT, resolution=DEFAULT_RESOLUTION, func=None):
    """Square grid on ``[-extent, extent]^2``; optionally sample ``func(points)``."""
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    axis = np.linspace(-extent, extent, resolution)
    pts = axis[:, None] + 1j * axis[None, :]
    values = np.zeros(pts.shape, complex) if func is None else np.asarray(func(pts), dtype=complex)
    return PhaseGrid(axis, axis.copy(), values)


# -- closed-form states -----------------------------------------------------------

def coherent_wigner(alpha0, alpha):
    return 2 * np.exp(-np.abs(np.asarray(alpha) - alpha0) ** 2)


def thermal_wigner(nth, alpha):
    w = 2 * nth + 1
    return 2 * np.exp(-np.abs(np.asarray(alpha)) ** 2 / w) / w


def wigner_of_fock_diagonal(mu, alpha):
    """Wigner function of ``|mu><mu|``: ``2 (-1)^mu exp(-|alpha|^2) L_mu(2|alpha|^2)``."""
    r2 = np.abs(np.asarray(alpha)) ** 2
    return 2 * (-1) ** mu * np.exp(-r2) * laguerre(mu, 0, 2 * r2)


# -- damped oscillator ------------------------------------------------------------------

def damped_kernel(params, eta, alpha, t):
    """``K(eta, alpha; t)`` of the thermally damped oscillator.

    ``exp(-(2 nth + 1)(1 - e^{-kappa t}) |eta|^2 + e^{-kappa t/2}(eta* alpha e^{-i omega0 t} - c.c.))``
    """
    if t < 0:
        raise ValueError("t must be non-negative")
    eta = np.asarray(eta, dtype=complex)
    alpha = np.asarray(alpha, dtype=complex)
    decay = np.exp(-params.kappa * t)
    cross = np.exp(-params.kappa * t / 2) * eta.conj() * alpha * np.exp(-1j * params.omega0 * t)
    return np.exp(-params.width * (1 - decay) * np.abs(eta) ** 2 + 2j * cross.imag)


class DeltaDistribution(ValueError):
    """Propagator requested where it is a delta distribution (zero diffusion)."""


def damped_wigner_propagator(params, beta, alpha, t):
    """Classical-classical propagator ``Xi(beta, alpha; t)``.

    A normalized Gaussian in ``beta`` around ``e^{-i omega0 t - kappa t/2} alpha``:
    ``Xi = (2/v) exp(-|beta - centre|^2 / v)`` with
    ``v = (2 nth + 1)(1 - e^{-kappa t})``, so that ``int d^2 beta/(2 pi) Xi = 1``.
    """
    v = params.width * (1 - np.exp(-params.kappa * t))
    if v <= 0:
        raise DeltaDistribution("zero diffusion: the propagator is a delta distribution")
    centre = np.exp((-1j * params.omega0 - params.kappa / 2) * t) * np.asarray(alpha)
    return 2 / v * np.exp(-np.abs(np.asarray(beta) - centre) ** 2 / v)


def fokker_planck_wigner(params, grid):
    """Generator acting on a Wigner grid, ``i dW/dt = FP W``, by central differences.

    ``FP = -(w0 - i k/2) d_a a + (w0 + i k/2) d_a* a* + i k (2 nth + 1) d_a d_a*``
    with ``d_a = (d_x - i d_y)/2``. Values on the outermost ring are not meaningful.
    """
    h_re, h_im = grid.spacing
    x = grid.re[:, None]
    y = grid.im[None, :]
    alpha = x + 1j * y

    def dx(f):
        return np.gradient(f, h_re, axis=0)

    def dy(f):
        return np.gradient(f, h_im, axis=1)

    def d_a(f):
        return 0.5 * (dx(f) - 1j * dy(f))

    def d_ac(f):
        return 0.5 * (dx(f) + 1j * dy(f))

    W = grid.values
    w0, k = params.omega0, params.kappa
    # d_a d_a* = (d_xx + d_yy)/4; second differences taken directly for accuracy
    lap = np.zeros_like(W)
    lap[1:-1, :] += (W[2:, :] - 2 * W[1:-1, :] + W[:-2, :]) / h_re**2
    lap[:, 1:-1] += (W[:, 2:] - 2 * W[:, 1:-1] + W[:, :-2]) / h_im**2
    out = (-(w0 - 0.5j * k) * d_a(alpha * W) + (w0 + 0.5j * k) * d_ac(alpha.conj() * W)
           + 1j * k * params.width * lap / 4)
    return grid.with_values(out)


def evolve_wigner_damped(params, grid, t):
    """Propagate a Wigner grid of the damped oscillator over time ``t``.

    The propagator Gaussian is centred on ``u alpha`` with
    ``u = e^{-i omega0 t - kappa t/2}``; substituting ``alpha' = u alpha`` turns the
    quadrature into a rotation-and-rescaling of the input (spline
    interpolation) followed by :func:`gaussian_convolve`.
    """
    if t < 0:
        raise ValueError("t must be non-negative")
    if t == 0:
        return grid
    u = np.exp((-1j * params.omega0 - params.kappa / 2) * t)
    pts = grid.points / u
    moved = _interpolate(grid, pts) / abs(u) ** 2
    v = params.width * (1 - np.exp(-params.kappa * t))
    out = grid.with_values(moved)
    if v > 0:
        out = gaussian_convolve(out, v)
    return out


def _interpolate(grid, pts, order=5):
    """Spline interpolation of grid values at arbitrary complex points (zero outside)."""
    d_re, d_im = grid.spacing
    i = (pts.real - grid.re[0]) / d_re
    j = (pts.imag - grid.im[0]) / d_im
    coords = np.array([i.ravel(), j.ravel()])
    vals = grid.values
    re = ndimage.map_coordinates(vals.real, coords, order=order, mode="constant", cval=0.0)
    out = re.astype(complex)
    if np.any(vals.imag):
        out = out + 1j * ndimage.map_coordinates(vals.imag, coords, order=order, mode="constant", cval=0.0)
    return out.reshape(pts.shape)


# -- Fourier pair and Gaussian convolution ---------------------------------------------

def fourier_wigner_characteristic(grid, direction="to_characteristic", target=None):
    """Direct-quadrature Fourier transform between ``W`` and ``Lambda``.

    Parameters
    ----------
    grid : PhaseGrid
        Input samples (``W`` on alpha, or ``Lambda`` on eta).
    direction : {"to_characteristic", "to_wigner"}
    target : (re_axis, im_axis), optional
        Output axes; defaults to the input axes.

    The kernel ``exp(eta* alpha - eta alpha*) = exp(2i (eta_x alpha_y - eta_y alpha_x))``
    factorizes, so the 2-D sum is two matrix products.
    """
    out_re, out_im = (grid.re, grid.im) if target is None else target
    out_re = np.asarray(out_re, dtype=float)
    out_im = np.asarray(out_im, dtype=float)
    if grid.boundary_max() > ALIASING_THRESHOLD * max(np.abs(grid.values).max(), 1e-300):
        warnings.warn(
            f"boundary values up to {grid.boundary_max():.1e}: grid may not span the support",
            stacklevel=2,
        )
    V = grid.values
    if direction == "to_characteristic":
        A = np.exp(2j * np.outer(out_re, grid.im))      # [p, j]
        B = np.exp(-2j * np.outer(out_im, grid.re))     # [q, i]
        vals = A @ (B @ V).T * (grid.cell / (2 * np.pi))
    elif direction == "to_wigner":
        A = np.exp(-2j * np.outer(out_im, grid.re))     # [j, p]: exp(-2i eta_x alpha_y)
        B = np.exp(2j * np.outer(out_re, grid.im))      # [i, q]: exp(2i eta_y alpha_x)
        vals = B @ V.T @ A.T * (2 * grid.cell / np.pi)
    else:
        raise ValueError("direction must be 'to_characteristic' or 'to_wigner'")
    return PhaseGrid(out_re, out_im, vals, dict(grid.meta, kind=direction))


def gaussian_convolve(grid, width):
    """``W_out(alpha) = int d^2 beta / (width pi) exp(-|alpha - beta|^2 / width) W_in(beta)``."""
    if width <= 0:
        raise ValueError("width must be positive")
    Gx = np.exp(-np.subtract.outer(grid.re, grid.re) ** 2 / width)
    Gy = np.exp(-np.subtract.outer(grid.im, grid.im) ** 2 / width)
    vals = Gx @ grid.values @ Gy.T * (grid.cell / (width * np.pi))
    return grid.with_values(vals)


# -- eigenfunctions of the damped-oscillator generator ---------------------------------

def _angular_power(alpha, power, conj):
    a = np.asarray(alpha, dtype=complex)
    return (a.conj() if conj else a) ** power


def right_eigvec_wigner(mu, nu, nth, alpha):
    """Wigner function of the right eigenvector ``r_{mu nu}``.

    ``sqrt(min!/max!) 2 (-1)^min e^{-|a|^2/w} / w^{max+1} e^{-i phi (mu-nu)} |a|^{|mu-nu|}
    L^{|mu-nu|}_min(|a|^2 / w)`` with ``w = 2 nth + 1``.
    """
    w = 2 * nth + 1
    lo, hi = min(mu, nu), max(mu, nu)
    r2 = np.abs(np.asarray(alpha)) ** 2
    ang = _angular_power(alpha, hi - lo, conj=mu >= nu)
    pref = np.sqrt(factorial(lo) / factorial(hi)) * 2 * (-1) ** lo / w ** (hi + 1)
    return pref * np.exp(-r2 / w) * ang * laguerre(lo, hi - lo, r2 / w)


def left_eigvec_phase(mu, nu, nth, alpha):
    """Overlap ``<<l_{mu nu}|alpha_cl>>`` of the left eigenvector with the displaced-parity ket.

    ``sqrt(min!/max!) (-1)^min w^min e^{i phi (mu-nu)} |a|^{|mu-nu|} L^{|mu-nu|}_min(|a|^2/w)``.
    Biorthogonality reads ``int d^2 a/(2 pi) left_{mu' nu'}(a) right_{mu nu}(a) = delta delta``
    with no further conjugation.
    """
    w = 2 * nth + 1
    lo, hi = min(mu, nu), max(mu, nu)
    r2 = np.abs(np.asarray(alpha)) ** 2
    ang = _angular_power(alpha, hi - lo, conj=mu < nu)
    pref = np.sqrt(factorial(lo) / factorial(hi)) * (-1) ** lo * w ** lo
    return pref * ang * laguerre(lo, hi - lo, r2 / w)


# -- CSV serialization ---------------------------------------------------------------------

def write_grid_csv(path, grid, header=None):
    """Rows ``(Re alpha, Im alpha, Re value, Im value)`` after ``#`` metadata lines."""
    d_re, d_im = grid.spacing
    lines = [f"# convention: {CONVENTION}", f"# spacing: {d_re!r} {d_im!r}",
             f"# shape: {grid.re.size} {grid.im.size}"]
    for key, value in sorted((header or {}).items()):
        lines.append(f"# {key}: {value}")
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")
        writer = csv.writer(fh)
        writer.writerow(["re_alpha", "im_alpha", "re_value", "im_value"])
        for i, x in enumerate(grid.re):
            for j, y in enumerate(grid.im):
                v = grid.values[i, j]
                writer.writerow([repr(float(x)), repr(float(y)), repr(float(v.real)), repr(float(v.imag))])
            # blank line between scan rows keeps the file usable by gnuplot's pm3d
            fh.write("\n")


def read_grid_csv(path):
    meta = {}
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, value = line[1:].partition(":")
                meta[key.strip()] = value.strip()
                continue
            if line.startswith("re_alpha"):
                continue
            rows.append([float(v) for v in line.split(",")])
    data = np.array(rows)
    n_re, n_im = (int(v) for v in meta["shape"].split())
    data = data.reshape(n_re, n_im, 4)
    return PhaseGrid(data[:, 0, 0].copy(), data[0, :, 1].copy(), data[..., 2] + 1j * data[..., 3], meta)
