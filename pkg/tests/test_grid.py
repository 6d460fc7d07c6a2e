import numpy as np
import pytest

from hallmhd.grid import (
    HermitianSymmetryError,
    curl,
    dealias,
    divergence,
    divergence_residual,
    forward_transform,
    fourier_amplitude,
    gradient_component,
    inverse_transform,
    laplacian,
    leray_project,
    make_grid,
    norms,
    pin_zero_mode,
    radial_multiplier,
    seminorm,
    sobolev_norm,
    spectral_inner,
)
from conftest import solenoidal_field

TWO_PI = 2 * np.pi


class TestMakeGrid:
    def test_basic_tables(self):
        g = make_grid(8, TWO_PI, 2 / 3)
        assert g.dx == pytest.approx(TWO_PI / 8)
        assert g.dk == pytest.approx(1.0)
        assert sorted(np.round(g.k1.tolist(), 12)) == [-4, -3, -2, -1, 0, 1, 2, 3]
        assert g.kcut_index == 2
        assert g.dealias_mask.sum() == 125  # 5^3 surviving modes

    def test_kmin_large_box(self):
        g = make_grid(256, 128.0)
        assert g.dk == pytest.approx(2 * np.pi / 128, rel=1e-12)
        assert g.dk == pytest.approx(0.0491, abs=1e-4)

    @pytest.mark.parametrize("n", [7, 9, 0, -8, 6])
    def test_rejects_bad_n(self, n):
        with pytest.raises((ValueError, TypeError)):
            make_grid(n, TWO_PI)

    def test_rejects_bad_box_and_fraction(self):
        with pytest.raises(ValueError):
            make_grid(8, -1.0)
        with pytest.raises(ValueError):
            make_grid(8, TWO_PI, 1.5)
        with pytest.raises(ValueError):
            make_grid(8, TWO_PI, 0.0)

    def test_strict_cutoff_avoids_quadratic_aliasing(self):
        # with 3 | n the inclusive 2/3 cutoff would alias the edge mode
        g = make_grid(48, TWO_PI)
        assert 3 * g.kcut_index < g.n


class TestTransforms:
    def test_round_trip(self, grid16):
        rng = np.random.default_rng(0)
        f = rng.standard_normal((3, 16, 16, 16))
        f2 = inverse_transform(forward_transform(f, grid16), grid16)
        assert np.abs(f - f2).max() <= 1e-13 * np.abs(f).max()

    def test_constant_field_zero_mode(self, grid16):
        c = np.zeros((3, 16, 16, 16))
        c[0] = 2.5
        s = forward_transform(c, grid16)
        expected = (TWO_PI) ** (-1.5) * 2.5 * grid16.box_length**3
        assert s[0, 0, 0, 0] == pytest.approx(expected, rel=1e-13)
        s[0, 0, 0, 0] = 0.0
        assert np.abs(s).max() < 1e-12 * expected

    def test_single_mode_coefficients(self, grid16):
        X = grid16.meshgrid()[0]
        f = np.zeros((3, 16, 16, 16))
        f[0] = np.sin(X)
        s = forward_transform(f, grid16)
        expected = (TWO_PI) ** (-1.5) * grid16.box_length**3 / 2
        assert s[0, 1, 0, 0] == pytest.approx(-1j * expected, abs=1e-12 * expected)
        assert s[0, -1, 0, 0] == pytest.approx(1j * expected, abs=1e-12 * expected)

    def test_parseval(self, grid16):
        rng = np.random.default_rng(1)
        f = rng.standard_normal((3, 16, 16, 16))
        s = forward_transform(f, grid16)
        lhs = np.sum(f * f) * grid16.dx**3
        rhs = np.sum(np.abs(s) ** 2) * grid16.dk**3
        assert abs(lhs - rhs) <= 1e-12 * lhs

    def test_zero_spectrum_and_constant(self, grid16):
        z = np.zeros((3, 16, 16, 16), complex)
        assert np.all(inverse_transform(z, grid16) == 0.0)
        z[1, 0, 0, 0] = (TWO_PI) ** (-1.5) * 3.0 * grid16.box_length**3
        back = inverse_transform(z, grid16)
        assert back[1] == pytest.approx(3.0)

    def test_broken_symmetry_reports_offender(self, grid16):
        s = forward_transform(np.random.default_rng(2).standard_normal((3, 16, 16, 16)), grid16)
        s[0, 3, 2, 1] += 10.0 * np.abs(s).max()
        with pytest.raises(HermitianSymmetryError) as err:
            inverse_transform(s, grid16)
        assert err.value.max_asymmetry > 0
        assert len(err.value.worst_k) == 3

    def test_rejects_nonfinite(self, grid16):
        f = np.zeros((3, 16, 16, 16))
        f[0, 0, 0, 0] = np.nan
        with pytest.raises(ValueError):
            forward_transform(f, grid16)


class TestOperators:
    def test_curl_of_constant_is_zero(self, grid16):
        c = np.zeros((3, 16, 16, 16), complex)
        c[2, 0, 0, 0] = 4.2
        assert np.abs(curl(c, grid16)).max() == 0.0

    def test_div_curl_identity(self, grid16):
        w = solenoidal_field(grid16, 3)
        r = np.abs(divergence(curl(w, grid16), grid16)).max()
        assert r <= 1e-13 * np.abs(w).max()

    def test_curl_grad_identity(self, grid16):
        rng = np.random.default_rng(4)
        phi = forward_transform(rng.standard_normal((16, 16, 16)), grid16)
        gradphi = np.stack([gradient_component(phi, grid16, a) for a in range(3)])
        r = np.abs(curl(gradphi, grid16)).max()
        assert r <= 1e-13 * np.abs(gradphi).max()

    def test_laplacian_single_mode(self, grid16):
        X = grid16.meshgrid()[0]
        f = np.zeros((3, 16, 16, 16))
        f[1] = np.sin(X)
        lap = inverse_transform(laplacian(forward_transform(f, grid16), grid16), grid16)
        assert np.abs(lap + f).max() <= 1e-12

    def test_radial_multiplier_monotone_on_bands(self, grid16):
        # fields supported on |k| >= 1: seminorm grows with m
        w = solenoidal_field(grid16, 5)
        w = w * (grid16.kmag >= 1.0)
        values = [seminorm(w, grid16, m) for m in range(4)]
        assert all(values[i + 1] >= values[i] for i in range(3))

    def test_radial_multiplier_m0_copy(self, grid16):
        w = solenoidal_field(grid16, 6)
        out = radial_multiplier(w, grid16, 0)
        assert np.array_equal(out, w) and out is not w


class TestLeray:
    def test_fixes_divergence_free(self, grid16):
        w = solenoidal_field(grid16, 7)
        assert np.abs(leray_project(w, grid16) - w).max() <= 1e-14 * np.abs(w).max()

    def test_kills_gradients(self, grid16):
        rng = np.random.default_rng(8)
        phi = forward_transform(rng.standard_normal((16, 16, 16)), grid16)
        gradphi = np.stack([gradient_component(phi, grid16, a) for a in range(3)])
        assert np.abs(leray_project(gradphi, grid16)).max() <= 1e-14 * np.abs(gradphi).max()

    def test_explicit_mode_formula(self, grid16):
        s = np.zeros((3, 16, 16, 16), complex)
        s[0, 1, 0, 0] = 1.0
        s[1, 1, 0, 0] = 1.0
        p = leray_project(s, grid16)
        assert p[:, 1, 0, 0] == pytest.approx([0.0, 1.0, 0.0])

    def test_idempotent_and_self_adjoint(self, grid16):
        rng = np.random.default_rng(9)
        a = forward_transform(rng.standard_normal((3, 16, 16, 16)), grid16)
        b = forward_transform(rng.standard_normal((3, 16, 16, 16)), grid16)
        pa = leray_project(a, grid16)
        assert np.abs(leray_project(pa, grid16) - pa).max() <= 1e-12 * np.abs(pa).max()
        lhs = spectral_inner(leray_project(a, grid16), b, grid16)
        rhs = spectral_inner(a, leray_project(b, grid16), grid16)
        assert lhs == pytest.approx(rhs, rel=1e-12)


class TestDealias:
    def test_idempotent(self, grid16):
        w = solenoidal_field(grid16, 10)
        assert np.array_equal(dealias(w, grid16), w)

    def test_mode_count_n8(self):
        g = make_grid(8, TWO_PI)
        full = np.ones((3, 8, 8, 8), complex)
        kept = dealias(full, g)
        assert int((np.abs(kept[0]) > 0).sum()) == 125

    def test_zero_field(self, grid16):
        z = np.zeros((3, 16, 16, 16), complex)
        assert np.all(dealias(z, grid16) == 0)


class TestNorms:
    def test_zero_field(self, grid16):
        nb = norms(np.zeros((3, 16, 16, 16)), grid16, m_max=2)
        assert nb.l1 == nb.l2 == nb.linf == 0.0
        assert all(v == 0.0 for v in nb.hm.values())

    def test_constant_field(self, grid16):
        c = np.zeros((3, 16, 16, 16))
        c[0] = -1.5
        L = grid16.box_length
        nb = norms(c, grid16, m_max=1)
        assert nb.l2 == pytest.approx(1.5 * L**1.5, rel=1e-12)
        assert nb.l1 == pytest.approx(1.5 * L**3, rel=1e-12)
        assert nb.linf == pytest.approx(1.5, rel=1e-12)

    def test_sine_norms(self, grid16):
        X = grid16.meshgrid()[0]
        f = np.zeros((3, 16, 16, 16))
        f[0] = np.sin(X)
        nb = norms(f, grid16, m_max=1)
        assert nb.l2**2 == pytest.approx((TWO_PI) ** 3 / 2, rel=1e-12)
        assert nb.hm[1] ** 2 == pytest.approx((TWO_PI) ** 3 / 2, rel=1e-12)
        assert nb.hm[0] == nb.l2

    def test_accepts_spectral_input(self, grid16):
        w = solenoidal_field(grid16, 11)
        nb_s = norms(w, grid16, m_max=2)
        nb_p = norms(inverse_transform(w, grid16), grid16, m_max=2)
        assert nb_s.l2 == pytest.approx(nb_p.l2, rel=1e-12)
        assert nb_s.hm[2] == pytest.approx(nb_p.hm[2], rel=1e-12)

    def test_sobolev_norm_combines_orders(self, grid16):
        w = solenoidal_field(grid16, 12)
        h2 = sobolev_norm(w, grid16, 2)
        parts = [seminorm(w, grid16, m) ** 2 for m in range(3)]
        assert h2 == pytest.approx(np.sqrt(sum(parts)), rel=1e-12)

    def test_rejects_negative_m(self, grid16):
        with pytest.raises(ValueError):
            norms(np.zeros((3, 16, 16, 16)), grid16, m_max=-1)


class TestFourierAmplitude:
    def test_zero_field(self, grid16):
        z = np.zeros((3, 16, 16, 16), complex)
        assert fourier_amplitude(z, grid16, (1.0, 0.0, 0.0)) == 0.0

    def test_constant_field(self, grid16):
        c = np.zeros((3, 16, 16, 16))
        c[0] = 2.0
        s = forward_transform(c, grid16)
        expected = (TWO_PI) ** (-1.5) * 2.0 * grid16.box_length**3
        assert fourier_amplitude(s, grid16, (0.0, 0.0, 0.0)) == pytest.approx(expected)

    def test_single_mode(self, grid16):
        X = grid16.meshgrid()[0]
        f = np.zeros((3, 16, 16, 16))
        f[0] = np.sin(X)
        s = forward_transform(f, grid16)
        expected = (TWO_PI) ** (-1.5) * grid16.box_length**3 / 2
        assert fourier_amplitude(s, grid16, (1.0, 0.0, 0.0)) == pytest.approx(expected, rel=1e-12)

    def test_rejects_off_grid(self, grid16):
        z = np.zeros((3, 16, 16, 16), complex)
        with pytest.raises(ValueError):
            fourier_amplitude(z, grid16, (0.5, 0.0, 0.0))
        with pytest.raises(ValueError):
            fourier_amplitude(z, grid16, (9.0, 0.0, 0.0))


def test_divergence_residual_detects_violation(grid16):
    w = solenoidal_field(grid16, 13)
    assert divergence_residual(w, grid16) <= 1e-13
    w[0] += 1e-3 * np.abs(w).max()  # inject compressible content
    pin_zero_mode(w)
    assert divergence_residual(w, grid16) > 1e-6
