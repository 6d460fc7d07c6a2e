import numpy as np
import pytest

from hallmhd.dynamics import (
    FieldNaNError,
    cross_validate_forms,
    divergence_form_rhs,
    hall_term,
    induction_nonlinear,
    momentum_nonlinear,
    primitive_form_rhs,
)
from hallmhd.grid import (
    curl,
    dealias,
    divergence_residual,
    forward_transform,
    inverse_transform,
    make_grid,
    norms,
    pin_zero_mode,
    spectral_inner,
    spectral_l2_sq,
)
from conftest import solenoidal_field


@pytest.fixture(scope="module")
def grid8():
    return make_grid(8, 2 * np.pi)


def spectral_convolution(a_hat, b_hat, g):
    """Direct circular convolution oracle for one scalar product a*b.

    (ab)^(k) = (2 pi)^(-3/2) dk^3 sum_q a^(q) b^(k - q); independent of the
    FFT-based pseudo-spectral path (plain loop over modes).
    """
    out = np.zeros_like(a_hat)
    for i in range(g.n):
        for j in range(g.n):
            for l in range(g.n):
                aq = a_hat[i, j, l]
                if aq != 0.0:
                    out += aq * np.roll(b_hat, (i, j, l), axis=(0, 1, 2))
    return (2 * np.pi) ** (-1.5) * g.dk**3 * out


def oracle_momentum(u, B, g):
    """Momentum tendency assembled from convolution-oracle tensors."""
    kx, ky, kz = g.k_components()
    k = (kx, ky, kz)
    out = np.zeros_like(u)
    for i in range(3):
        acc = 0.0
        for j in range(3):
            s_ij = spectral_convolution(u[i], u[j], g) - spectral_convolution(B[i], B[j], g)
            acc = acc + k[j] * s_ij
        out[i] = -1j * acc
    from hallmhd.grid import leray_project

    return pin_zero_mode(leray_project(out * g.dealias_mask, g))


def oracle_induction(u, B, hall, g):
    kx, ky, kz = g.k_components()
    k = (kx, ky, kz)
    out = np.zeros_like(u)
    for i in range(3):
        acc = 0.0
        for j in range(3):
            w_ij = spectral_convolution(u[i], B[j], g) - spectral_convolution(B[i], u[j], g)
            acc = acc + k[j] * w_ij
        out[i] = 1j * acc
    if hall != 0.0:
        div_bb = np.zeros_like(u)
        for i in range(3):
            acc = 0.0
            for j in range(3):
                acc = acc + k[j] * spectral_convolution(B[j], B[i], g)
            div_bb[i] = 1j * acc
        out = out - hall * curl(div_bb, g)
    return pin_zero_mode(out * g.dealias_mask)


class TestTrivialCases:
    def test_zero_fields(self, grid8):
        z = np.zeros((3, 8, 8, 8), complex)
        assert np.abs(momentum_nonlinear(z, z, grid8)).max() == 0.0
        assert np.abs(induction_nonlinear(z, z, 1.0, grid8)).max() == 0.0

    def test_aligned_fields_cancel(self, grid8):
        u = solenoidal_field(grid8, 1)
        assert np.abs(momentum_nonlinear(u, u, grid8)).max() == 0.0

    def test_zero_B_induction(self, grid8):
        u = solenoidal_field(grid8, 2)
        z = np.zeros_like(u)
        assert np.abs(induction_nonlinear(u, z, 1.0, grid8)).max() == 0.0

    def test_zero_u_no_hall_induction(self, grid8):
        B = solenoidal_field(grid8, 3)
        z = np.zeros_like(B)
        assert np.abs(induction_nonlinear(z, B, 0.0, grid8)).max() <= 1e-16

    def test_constant_B_hall_zero(self, grid8):
        B = np.zeros((3, 8, 8, 8), complex)
        B[0, 0, 0, 0] = 5.0
        assert np.abs(hall_term(B, grid8)).max() == 0.0


class TestConvolutionOracle:
    def test_momentum_matches_oracle(self, grid8):
        u = solenoidal_field(grid8, 4)
        B = solenoidal_field(grid8, 5)
        got = momentum_nonlinear(u, B, grid8)
        want = oracle_momentum(u, B, grid8)
        assert np.abs(got - want).max() <= 1e-12 * np.abs(want).max()

    def test_induction_matches_oracle(self, grid8):
        u = solenoidal_field(grid8, 6)
        B = solenoidal_field(grid8, 7)
        got = induction_nonlinear(u, B, 1.0, grid8)
        want = oracle_induction(u, B, 1.0, grid8)
        assert np.abs(got - want).max() <= 1e-12 * np.abs(want).max()

    def test_hall_term_matches_oracle_difference(self, grid8):
        B = solenoidal_field(grid8, 8)
        u = np.zeros_like(B)
        want = oracle_induction(u, B, 1.0, grid8) - oracle_induction(u, B, 0.0, grid8)
        got = -hall_term(B, grid8)
        assert np.abs(got - want).max() <= 1e-12 * max(np.abs(want).max(), 1e-300)


class TestStructure:
    @pytest.mark.parametrize("seed", [10, 11, 12])
    def test_outputs_divergence_free(self, grid8, seed):
        u = solenoidal_field(grid8, seed)
        B = solenoidal_field(grid8, seed + 100)
        assert divergence_residual(momentum_nonlinear(u, B, grid8), grid8) <= 1e-13
        assert divergence_residual(induction_nonlinear(u, B, 1.0, grid8), grid8) <= 1e-13
        assert divergence_residual(hall_term(B, grid8), grid8) <= 1e-13

    def test_hall_coefficient_linearity(self, grid8):
        u = solenoidal_field(grid8, 13)
        B = solenoidal_field(grid8, 14)
        d0 = induction_nonlinear(u, B, 0.0, grid8)
        d1 = induction_nonlinear(u, B, 1.0, grid8)
        dc = induction_nonlinear(u, B, 0.37, grid8)
        assert np.abs((dc - d0) - 0.37 * (d1 - d0)).max() <= 1e-13 * np.abs(d1 - d0).max()
        assert np.abs((d1 - d0) + hall_term(B, grid8)).max() <= 1e-12 * np.abs(d1 - d0).max()

    @pytest.mark.parametrize("seed", [20, 21])
    def test_hall_energy_neutrality(self, grid8, seed):
        B = solenoidal_field(grid8, seed)
        h = hall_term(B, grid8)
        ip = abs(spectral_inner(h, B, grid8))
        scale = (
            np.sqrt(spectral_l2_sq(curl(B, grid8), grid8))
            * np.sqrt(spectral_l2_sq(B, grid8))
            * norms(B, grid8, 0).linf
        )
        assert ip <= 1e-10 * scale

    @pytest.mark.parametrize("seed", [30, 31])
    def test_ideal_transport_neutrality(self, grid8, seed):
        u = solenoidal_field(grid8, seed)
        B = solenoidal_field(grid8, seed + 50)
        du = momentum_nonlinear(u, B, grid8)
        dB = induction_nonlinear(u, B, 0.0, grid8)
        total = abs(spectral_inner(du, u, grid8) + spectral_inner(dB, B, grid8))
        scale = np.sqrt(spectral_l2_sq(du, grid8)) * np.sqrt(spectral_l2_sq(u, grid8))
        assert total <= 1e-9 * scale


class TestFormEquivalence:
    def test_zero_fields(self, grid8):
        z = np.zeros((3, 8, 8, 8), complex)
        assert cross_validate_forms(z, z, 1.0, grid8) == 0.0

    def test_reduces_to_navier_stokes(self, grid8):
        u = solenoidal_field(grid8, 40)
        z = np.zeros_like(u)
        pair = primitive_form_rhs(u, z, 1.0, grid8)
        assert np.abs(pair.dB).max() == 0.0
        ns = momentum_nonlinear(u, z, grid8)
        assert np.abs(pair.du - ns).max() <= 1e-12 * np.abs(ns).max()

    @pytest.mark.parametrize("hall", [0.0, 1.0])
    def test_forms_agree_n32(self, hall):
        g = make_grid(32, 2 * np.pi)
        u = solenoidal_field(g, 41)
        B = solenoidal_field(g, 42)
        assert cross_validate_forms(u, B, hall, g) <= 1e-10

    def test_forms_disagree_with_compressible_input(self, grid8):
        u = solenoidal_field(grid8, 43)
        B = solenoidal_field(grid8, 44)
        bad = u.copy()
        bad[0] += 0.5 * np.abs(u).max()  # breaks div u = 0
        pin_zero_mode(bad)
        assert cross_validate_forms(bad, B, 1.0, grid8) > 1e-4

    def test_divergence_pair_consistency(self, grid8):
        u = solenoidal_field(grid8, 45)
        B = solenoidal_field(grid8, 46)
        pair = divergence_form_rhs(u, B, 1.0, grid8)
        assert np.abs(pair.du - momentum_nonlinear(u, B, grid8)).max() == 0.0
        assert np.abs(pair.dB - induction_nonlinear(u, B, 1.0, grid8)).max() == 0.0


def test_nan_rejection(grid8):
    u = solenoidal_field(grid8, 50)
    bad = u.copy()
    bad[0, 1, 1, 1] = np.nan
    with pytest.raises((FieldNaNError, Exception)):
        momentum_nonlinear(bad, u, grid8)
