"""Nonlinear right-hand sides of incompressible Hall-MHD.

Two assemblies of the same tendencies, diffusion excluded:

divergence form (used by the time stepper)
    du = -P div(u (x) u - B (x) B)
    dB = -div(u (x) B - B (x) u) - hall * curl(div(B (x) B))

primitive form (cross-validation)
    du = P[-(u.grad)u + (curl B) x B]
    dB = curl(u x B) - hall * curl((curl B) x B)

Tensor convention: (a (x) b)_ij = a_i b_j and (div M)_i = d_j M_ji.  All
quadratic products are formed pointwise in physical space from dealiased
operands and re-truncated after the forward transform, which keeps them
exactly alias-free under the strict 2/3 mask.  For divergence-free inputs
the two forms agree to roundoff; `cross_validate_forms` measures that.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import (
    Grid,
    curl,
    dealias,
    forward_transform,
    inverse_transform,
    leray_project,
    pin_zero_mode,
)


class FieldNaNError(FloatingPointError):
    """A pointwise product produced a non-finite value."""

    def __init__(self, where: str, index: tuple):
        self.where = where
        self.index = index
        super().__init__(f"non-finite value in {where} at grid index {index}")


@dataclass
class RhsPair:
    """Momentum and induction tendencies, both dealiased and solenoidal."""

    du: np.ndarray
    dB: np.ndarray


def _check_finite(arr: np.ndarray, where: str):
    if not np.all(np.isfinite(arr)):
        bad = np.argwhere(~np.isfinite(arr))[0]
        raise FieldNaNError(where, tuple(int(i) for i in bad))


def _to_physical(s: np.ndarray, g: Grid) -> np.ndarray:
    return inverse_transform(s, g, check=False)


def _tensor_divergence(t_hat_upper, g: Grid) -> np.ndarray:
    """(div M)_i = i k_j M_ji from the 6 unique entries of a symmetric M.

    ``t_hat_upper`` maps (i, j) with i <= j to the spectral entry M_ij.
    """
    kx, ky, kz = g.k_components()
    k = (kx, ky, kz)
    out = np.empty((3,) + g.k2.shape, dtype=complex)
    for i in range(3):
        acc = 0.0
        for j in range(3):
            key = (min(i, j), max(i, j))
            acc = acc + k[j] * t_hat_upper[key]
        out[i] = 1j * acc
    return out


def _symmetric_product_transform(a: np.ndarray, b: np.ndarray, g: Grid, where: str):
    """Dealiased spectral entries {(i,j): (a_i b_j)^} for i <= j; a == b in use."""
    out = {}
    for i in range(3):
        for j in range(i, 3):
            prod = a[i] * b[j]
            _check_finite(prod, where)
            out[(i, j)] = dealias(forward_transform(prod, g), g)
    return out


def _divergence_form_pair(u_hat, B_hat, hall_coefficient: float, g: Grid) -> RhsPair:
    u = _to_physical(u_hat, g)
    B = _to_physical(B_hat, g)

    uu = _symmetric_product_transform(u, u, g, "u tensor product")
    BB = _symmetric_product_transform(B, B, g, "B tensor product")

    # momentum: -P div(uu - BB)
    S = {key: uu[key] - BB[key] for key in uu}
    du = leray_project(-_tensor_divergence(S, g), g)

    # ideal induction: -(div(u(x)B - B(x)u))_i = i k_j W_ij with
    # W_ij = u_i B_j - B_i u_j (antisymmetric, 3 unique entries).
    kx, ky, kz = g.k_components()
    k = (kx, ky, kz)
    W = {}
    for (i, j) in ((0, 1), (0, 2), (1, 2)):
        prod = u[i] * B[j] - B[i] * u[j]
        _check_finite(prod, "u,B exchange tensor")
        W[(i, j)] = dealias(forward_transform(prod, g), g)

    def w_entry(i, j):
        if i == j:
            return 0.0
        if i < j:
            return W[(i, j)]
        return -W[(j, i)]

    dB = np.empty_like(u_hat)
    for i in range(3):
        acc = 0.0
        for j in range(3):
            if j != i:
                acc = acc + k[j] * w_entry(i, j)
        dB[i] = 1j * acc

    if hall_coefficient != 0.0:
        gb = _tensor_divergence(BB, g)  # div(B (x) B), spectral
        dB = dB - hall_coefficient * curl(gb, g)

    pin_zero_mode(du)
    pin_zero_mode(dB)
    return RhsPair(du=du, dB=dB)


def momentum_nonlinear(u_hat: np.ndarray, B_hat: np.ndarray, g: Grid) -> np.ndarray:
    """-P div(u (x) u - B (x) B), dealiased and divergence-free."""
    return _divergence_form_pair(u_hat, B_hat, 0.0, g).du


def induction_nonlinear(
    u_hat: np.ndarray, B_hat: np.ndarray, hall_coefficient: float, g: Grid
) -> np.ndarray:
    """-div(u (x) B - B (x) u) - hall * curl(div(B (x) B)).

    hall_coefficient = 0 reduces to the standard MHD induction nonlinearity.
    The output is a combination of an antisymmetric-flux divergence and a
    curl, hence divergence-free to roundoff without projection.
    """
    return _divergence_form_pair(u_hat, B_hat, hall_coefficient, g).dB


def hall_term(B_hat: np.ndarray, g: Grid) -> np.ndarray:
    """curl((curl B) x B) with the cross product formed in physical space."""
    J = _to_physical(curl(B_hat, g), g)
    B = _to_physical(B_hat, g)
    E = np.empty_like(J)
    E[0] = J[1] * B[2] - J[2] * B[1]
    E[1] = J[2] * B[0] - J[0] * B[2]
    E[2] = J[0] * B[1] - J[1] * B[0]
    _check_finite(E, "hall cross product")
    E_hat = dealias(forward_transform(E, g), g)
    return pin_zero_mode(curl(E_hat, g))


def primitive_form_rhs(
    u_hat: np.ndarray, B_hat: np.ndarray, hall_coefficient: float, g: Grid
) -> RhsPair:
    """Tendencies assembled from the convective / Lorentz-force form."""
    u = _to_physical(u_hat, g)
    B = _to_physical(B_hat, g)
    kx, ky, kz = g.k_components()
    k = (kx, ky, kz)

    # (u.grad)u, gradients taken spectrally, products pointwise
    conv = np.zeros_like(u)
    for i in range(3):
        for j in range(3):
            dju_i = _to_physical(1j * k[j] * u_hat[i], g)
            conv[i] += u[j] * dju_i
    _check_finite(conv, "convection product")

    J = _to_physical(curl(B_hat, g), g)
    JxB = np.empty_like(J)
    JxB[0] = J[1] * B[2] - J[2] * B[1]
    JxB[1] = J[2] * B[0] - J[0] * B[2]
    JxB[2] = J[0] * B[1] - J[1] * B[0]
    _check_finite(JxB, "Lorentz force product")

    du = leray_project(
        dealias(forward_transform(-conv + JxB, g), g), g
    )

    uxB = np.empty_like(u)
    uxB[0] = u[1] * B[2] - u[2] * B[1]
    uxB[1] = u[2] * B[0] - u[0] * B[2]
    uxB[2] = u[0] * B[1] - u[1] * B[0]
    _check_finite(uxB, "u x B product")
    dB = curl(dealias(forward_transform(uxB, g), g), g)
    if hall_coefficient != 0.0:
        dB = dB - hall_coefficient * curl(dealias(forward_transform(JxB, g), g), g)

    pin_zero_mode(du)
    pin_zero_mode(dB)
    return RhsPair(du=du, dB=dB)


def divergence_form_rhs(
    u_hat: np.ndarray, B_hat: np.ndarray, hall_coefficient: float, g: Grid
) -> RhsPair:
    """Tendencies assembled from the conservative tensor-divergence form."""
    return _divergence_form_pair(u_hat, B_hat, hall_coefficient, g)


def cross_validate_forms(
    u_hat: np.ndarray, B_hat: np.ndarray, hall_coefficient: float, g: Grid
) -> float:
    """Max relative spectral mismatch between the two assemblies.

    For dealiased divergence-free inputs the forms are analytically equal;
    the return value is the roundoff-level residual (contract: <= 1e-10).
    """
    a = divergence_form_rhs(u_hat, B_hat, hall_coefficient, g)
    b = primitive_form_rhs(u_hat, B_hat, hall_coefficient, g)
    scale = max(
        np.abs(a.du).max(), np.abs(a.dB).max(), np.abs(b.du).max(), np.abs(b.dB).max()
    )
    if scale == 0.0:
        return 0.0
    diff = max(np.abs(a.du - b.du).max(), np.abs(a.dB - b.dB).max())
    return float(diff / scale)
