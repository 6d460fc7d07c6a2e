"""Periodic-box spectral grid: transforms, differential operators, norms.

Fields live on a cubic box [0, L)^3 with n points per axis.  Spectral
coefficients use a continuum-approximating normalization,

    u_hat(k) = (2*pi)**(-3/2) * sum_x u(x) exp(-i k.x) * dx**3,

so that coefficients of localized data approximate the whole-space Fourier
transform and discrete Parseval reads

    sum_x |u(x)|**2 dx**3 = sum_k |u_hat(k)|**2 dk**3,   dk = 2*pi/L.

Vector fields are arrays of shape (3, n, n, n): real float64 in physical
space, complex128 in spectral space, with wavevectors in numpy fft order.
All operations are pure; nothing here mutates its inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.fft as _fft

_TWO_PI = 2.0 * math.pi


class HermitianSymmetryError(ValueError):
    """Spectral field is not the transform of a real field."""

    def __init__(self, max_asymmetry: float, worst_k: tuple[float, float, float]):
        self.max_asymmetry = max_asymmetry
        self.worst_k = worst_k
        super().__init__(
            f"Hermitian symmetry violated: relative asymmetry {max_asymmetry:.3e} "
            f"at k = {worst_k}"
        )


@dataclass(frozen=True)
class Grid:
    """Precomputed wavevector tables and dealias mask for one resolution.

    Use :func:`make_grid` to construct; the constructor assumes validated
    arguments.  ``k1`` is the 1-d wavevector table in fft order; ``k2`` and
    ``kmag`` are the full |k|^2 and |k| arrays.  The dealias mask keeps
    integer mode indices m with 3*|m| < n at the default fraction 2/3, which
    is the strict form of the 2/3 rule: quadratic products of masked fields
    are then exactly alias-free on the mask, including when 3 divides n.
    """

    n: int
    box_length: float
    dealias_fraction: float
    dx: float = field(init=False)
    dk: float = field(init=False)
    kcut_index: int = field(init=False)
    k1: np.ndarray = field(init=False, repr=False)
    k2: np.ndarray = field(init=False, repr=False)
    kmag: np.ndarray = field(init=False, repr=False)
    dealias_mask: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        dx = self.box_length / self.n
        dk = _TWO_PI / self.box_length
        object.__setattr__(self, "dx", dx)
        object.__setattr__(self, "dk", dk)

        index = np.fft.fftfreq(self.n, d=1.0 / self.n)  # integer mode indices
        k1 = dk * index
        kx = k1[:, None, None]
        ky = k1[None, :, None]
        kz = k1[None, None, :]
        k2 = kx**2 + ky**2 + kz**2
        object.__setattr__(self, "k1", k1)
        object.__setattr__(self, "k2", k2)
        object.__setattr__(self, "kmag", np.sqrt(k2))

        # Largest kept index: strictly below fraction * n/2 on every axis.
        kcut = math.ceil(self.dealias_fraction * self.n / 2.0) - 1
        kcut = max(kcut, 0)
        object.__setattr__(self, "kcut_index", kcut)
        keep1 = np.abs(index) <= kcut
        mask = keep1[:, None, None] & keep1[None, :, None] & keep1[None, None, :]
        object.__setattr__(self, "dealias_mask", mask)
        # memo for integrating-factor arrays, keyed on (coefficient, tau)
        object.__setattr__(self, "_exp_cache", {})

    # -- coordinate helpers -------------------------------------------------

    def axis_points(self) -> np.ndarray:
        """Grid coordinates along one axis, [0, L)."""
        return self.dx * np.arange(self.n)

    def meshgrid(self):
        """Physical coordinate arrays X, Y, Z of shape (n, n, n)."""
        x = self.axis_points()
        return np.meshgrid(x, x, x, indexing="ij")

    def k_components(self):
        """Broadcastable wavevector component arrays (kx, ky, kz)."""
        return (
            self.k1[:, None, None],
            self.k1[None, :, None],
            self.k1[None, None, :],
        )

    def mode_index(self, k) -> tuple[int, int, int]:
        """Map a physical wavevector to integer grid indices.

        Rejects wavevectors that are not integer multiples of dk or that lie
        outside the resolved range.
        """
        idx = []
        for c in k:
            m = c / self.dk
            mr = round(m)
            if abs(m - mr) > 1e-9 * max(1.0, abs(m)):
                raise ValueError(f"wavevector component {c} is not on the grid (dk={self.dk})")
            if not (-self.n // 2 <= mr <= self.n // 2 - 1):
                raise ValueError(f"wavevector component {c} outside resolved range")
            idx.append(int(mr) % self.n)
        return tuple(idx)

    def decay_factor(self, coefficient: float, tau: float) -> np.ndarray:
        """exp(-coefficient * |k|^2 * tau), memoized per (coefficient, tau)."""
        key = (float(coefficient), float(tau))
        cache = self._exp_cache
        if key not in cache:
            if len(cache) > 24:
                cache.clear()
            cache[key] = np.exp((-coefficient * tau) * self.k2)
        return cache[key]


def make_grid(n: int, box_length: float, dealias_fraction: float = 2.0 / 3.0) -> Grid:
    """Construct a Grid, validating resolution and box parameters."""
    if not isinstance(n, (int, np.integer)):
        raise TypeError("n must be an integer")
    if n < 8 or n % 2 != 0:
        raise ValueError(f"n must be even and >= 8, got {n}")
    if not box_length > 0:
        raise ValueError(f"box_length must be positive, got {box_length}")
    if not (0.0 < dealias_fraction <= 1.0):
        raise ValueError(f"dealias_fraction must lie in (0, 1], got {dealias_fraction}")
    return Grid(n=int(n), box_length=float(box_length), dealias_fraction=float(dealias_fraction))


# -- transforms --------------------------------------------------------------


def _norm_factor(g: Grid) -> float:
    return (_TWO_PI) ** (-1.5) * g.dx**3


def forward_transform(f: np.ndarray, g: Grid) -> np.ndarray:
    """Physical (…, n, n, n) real field -> continuum-normalized coefficients."""
    if not np.all(np.isfinite(f)):
        raise ValueError("non-finite values in physical field")
    return _fft.fftn(f, axes=(-3, -2, -1), workers=-1) * _norm_factor(g)


def inverse_transform(s: np.ndarray, g: Grid, check: bool = True) -> np.ndarray:
    """Spectral coefficients -> real physical field.

    The imaginary residue after the inverse transform measures Hermitian
    asymmetry; it is required to stay below 1e-12 relative.  On violation the
    offending wavevector is located and reported.
    """
    w = _fft.ifftn(s / _norm_factor(g), axes=(-3, -2, -1), workers=-1)
    if check:
        scale = float(np.max(np.abs(w.real)))
        resid = float(np.max(np.abs(w.imag)))
        if resid > 1e-12 * max(scale, 1e-300):
            _raise_asymmetry(s, g)
    return np.ascontiguousarray(w.real)


def _raise_asymmetry(s: np.ndarray, g: Grid):
    flipped = np.roll(s[..., ::-1, ::-1, ::-1], 1, axis=(-3, -2, -1))
    asym = np.abs(s - np.conj(flipped))
    flat = int(np.argmax(asym))
    ijk = np.unravel_index(flat, asym.shape)[-3:]
    k = tuple(float(g.k1[i]) for i in ijk)
    scale = float(np.max(np.abs(s)))
    raise HermitianSymmetryError(float(asym.max()) / max(scale, 1e-300), k)


# -- differential operators ---------------------------------------------------


def gradient_component(s: np.ndarray, g: Grid, axis: int) -> np.ndarray:
    """i*k_axis multiplier (spectral partial derivative)."""
    kx = g.k1.reshape([-1 if a == axis else 1 for a in range(3)])
    return 1j * kx * s


def divergence(s: np.ndarray, g: Grid) -> np.ndarray:
    """i k . s for a spectral vector field (3, n, n, n) -> scalar spectrum."""
    kx, ky, kz = g.k_components()
    return 1j * (kx * s[0] + ky * s[1] + kz * s[2])


def curl(s: np.ndarray, g: Grid) -> np.ndarray:
    """i k x s for a spectral vector field."""
    kx, ky, kz = g.k_components()
    out = np.empty_like(s)
    out[0] = 1j * (ky * s[2] - kz * s[1])
    out[1] = 1j * (kz * s[0] - kx * s[2])
    out[2] = 1j * (kx * s[1] - ky * s[0])
    return out


def laplacian(s: np.ndarray, g: Grid) -> np.ndarray:
    return -g.k2 * s


def radial_multiplier(s: np.ndarray, g: Grid, m: int) -> np.ndarray:
    """|k|^m multiplier realizing the homogeneous derivative of order m."""
    if m == 0:
        return s.copy()
    return g.kmag**m * s


def leray_project(s: np.ndarray, g: Grid) -> np.ndarray:
    """Remove the gradient part: u_hat <- u_hat - k (k.u_hat)/|k|^2.

    The k = 0 mode is left unchanged (the projector is singular there).
    Idempotent and self-adjoint in the spectral inner product.
    """
    kx, ky, kz = g.k_components()
    k2 = g.k2.copy()
    k2[0, 0, 0] = 1.0
    kd = (kx * s[0] + ky * s[1] + kz * s[2]) / k2
    kd[0, 0, 0] = 0.0
    out = np.empty_like(s)
    out[0] = s[0] - kx * kd
    out[1] = s[1] - ky * kd
    out[2] = s[2] - kz * kd
    return out


def dealias(s: np.ndarray, g: Grid) -> np.ndarray:
    """Zero every mode with any |k_i| above the dealias cutoff (idempotent)."""
    return s * g.dealias_mask


def pin_zero_mode(s: np.ndarray) -> np.ndarray:
    """Zero the mean mode of a spectral field in place, returning it."""
    s[..., 0, 0, 0] = 0.0
    return s


# -- norms and amplitudes -----------------------------------------------------


@dataclass(frozen=True)
class NormBundle:
    """L1, L2, Linf and homogeneous Sobolev seminorms of one vector field."""

    l1: float
    l2: float
    linf: float
    hm: dict[int, float]


def spectral_inner(a: np.ndarray, b: np.ndarray, g: Grid) -> float:
    """Real L2 inner product of two spectral fields (sum over components)."""
    return float(np.sum(a.conj() * b).real) * g.dk**3


def spectral_l2_sq(s: np.ndarray, g: Grid, weight: np.ndarray | None = None) -> float:
    a2 = np.abs(s) ** 2
    if weight is not None:
        a2 = a2 * weight
    return float(np.sum(a2)) * g.dk**3


def seminorm(s: np.ndarray, g: Grid, m: int) -> float:
    """Homogeneous Sobolev seminorm ||D^m .||_{L2} via the |k|^m multiplier."""
    return math.sqrt(spectral_l2_sq(s, g, None if m == 0 else g.kmag ** (2 * m)))


def sobolev_norm(s: np.ndarray, g: Grid, m: int) -> float:
    """Inhomogeneous H^m norm: sqrt(sum of squared seminorms of order 0..m)."""
    w = np.zeros_like(g.k2)
    for j in range(m + 1):
        w += g.kmag ** (2 * j)
    return math.sqrt(spectral_l2_sq(s, g, w))


def norms(f: np.ndarray, g: Grid, m_max: int = 1) -> NormBundle:
    """Norm bundle of a vector field given in either space.

    Complex input is treated as spectral, real input as physical.  L1 and
    Linf are Riemann sums / maxima of the pointwise Euclidean magnitude on
    the physical grid; L2 and the order-m seminorms use Parseval.  The L2
    norm is computed in both spaces and required to agree to 1e-12 relative.
    """
    if m_max < 0:
        raise ValueError("m_max must be >= 0")
    if np.iscomplexobj(f):
        s = f
        p = inverse_transform(s, g)
    else:
        p = f
        s = forward_transform(p, g)
    mag = np.sqrt(np.sum(p * p, axis=0))
    l1 = float(np.sum(mag)) * g.dx**3
    linf = float(mag.max()) if mag.size else 0.0
    l2_phys = math.sqrt(float(np.sum(mag * mag)) * g.dx**3)
    l2_spec = seminorm(s, g, 0)
    if abs(l2_phys - l2_spec) > 1e-12 * max(l2_phys, l2_spec, 1e-300):
        raise AssertionError(
            f"Parseval violation: L2 physical {l2_phys!r} vs spectral {l2_spec!r}"
        )
    hm = {m: seminorm(s, g, m) for m in range(m_max + 1)}
    hm[0] = l2_spec
    return NormBundle(l1=l1, l2=l2_spec, linf=linf, hm=hm)


def fourier_amplitude(s: np.ndarray, g: Grid, k) -> float:
    """Euclidean magnitude of the 3-component coefficient at wavevector k."""
    i, j, l = g.mode_index(k)
    v = s[:, i, j, l]
    return float(np.sqrt(np.sum(np.abs(v) ** 2)))


def divergence_residual(s: np.ndarray, g: Grid) -> float:
    """Relative divergence content: ||k.s|| / ||(|k|) s||."""
    num = math.sqrt(spectral_l2_sq(divergence(s, g)[None], g))
    den = math.sqrt(spectral_l2_sq(s, g, g.k2))
    if den == 0.0:
        return 0.0
    return num / den
