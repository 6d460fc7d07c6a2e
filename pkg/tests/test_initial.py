import numpy as np
import pytest

from hallmhd.grid import (
    divergence_residual,
    make_grid,
    seminorm,
    sobolev_norm,
    spectral_l2_sq,
)
from hallmhd.initial import (
    InitSpec,
    LocalizationError,
    admissibility_report,
    gaussian_blob,
    gaussian_spectrum,
    make_initial_fields,
    random_band,
    rescale_small,
)
from hallmhd.integrator import PhysicsParams, SolverState, linear_evolve


@pytest.fixture(scope="module")
def g48():
    return make_grid(64, 32.0)


class TestGaussianBlob:
    def test_zero_amplitude(self, g48):
        u0, B0 = gaussian_blob(g48, InitSpec(amplitude=0.0))
        assert np.abs(u0).max() == 0.0 and np.abs(B0).max() == 0.0

    def test_divergence_free(self, g48):
        u0, B0 = gaussian_blob(g48, InitSpec(amplitude=0.1, seed=3))
        assert divergence_residual(u0, g48) <= 1e-13
        assert divergence_residual(B0, g48) <= 1e-13

    def test_zero_mean(self, g48):
        u0, B0 = gaussian_blob(g48, InitSpec(amplitude=0.1, seed=4))
        assert np.abs(u0[:, 0, 0, 0]).max() == 0.0
        assert np.abs(B0[:, 0, 0, 0]).max() == 0.0

    def test_width_scaling_of_l2(self, g48):
        spec1 = InitSpec(amplitude=0.1, width=0.75, seed=5)
        spec2 = InitSpec(amplitude=0.1, width=1.5, seed=5)
        u1, _ = gaussian_blob(g48, spec1)
        u2, _ = gaussian_blob(g48, spec2)
        ratio = seminorm(u2, g48, 0) / seminorm(u1, g48, 0)
        assert ratio == pytest.approx(2.0**1.5, rel=2e-3)

    def test_localization_rejection(self, g48):
        with pytest.raises(LocalizationError):
            gaussian_blob(g48, InitSpec(width=8.0))

    def test_boundary_decay_default_width(self):
        g = make_grid(96, 48.0)
        u0, B0 = gaussian_blob(g, InitSpec(amplitude=0.1, seed=6))
        rep = admissibility_report(u0, B0, g, boundary_threshold=1e-12)
        assert rep.passed, rep.failures


class TestRandomBand:
    def test_deterministic(self, g48):
        spec = InitSpec(kind="random_band", amplitude=0.05, band=(0.8, 2.0), seed=11)
        a = random_band(g48, spec)
        b = random_band(g48, spec)
        assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])

    def test_divergence_and_normalization(self, g48):
        spec = InitSpec(kind="random_band", amplitude=0.05, band=(0.8, 2.0), seed=12)
        u0, B0 = random_band(g48, spec)
        assert divergence_residual(u0, g48) <= 1e-12
        assert seminorm(u0, g48, 0) == pytest.approx(0.05, rel=1e-12)
        assert seminorm(B0, g48, 0) == pytest.approx(0.05, rel=1e-12)

    def test_spectral_support_reported(self, g48):
        spec = InitSpec(kind="random_band", amplitude=1.0, band=(0.8, 1.6), seed=13)
        u0, _ = random_band(g48, spec)
        a2 = np.sum(np.abs(u0) ** 2, axis=0)
        inside = a2[(g48.kmag >= 0.4) & (g48.kmag <= 2.4)].sum()
        assert inside >= 0.95 * a2.sum()  # band plus envelope broadening

    def test_requires_band(self, g48):
        with pytest.raises(ValueError):
            random_band(g48, InitSpec(kind="random_band"))

    def test_empty_shell_rejected(self):
        g = make_grid(16, 2 * np.pi)  # dk = 1, no modes below 0.5
        with pytest.raises(ValueError):
            random_band(g, InitSpec(kind="random_band", band=(0.2, 0.5), width=0.5))

    def test_band_above_cutoff_rejected(self, g48):
        kcut = g48.kcut_index * g48.dk
        with pytest.raises(ValueError):
            random_band(g48, InitSpec(kind="random_band", band=(0.5, 2 * kcut)))


class TestGaussianSpectrum:
    def test_exact_heat_decay_power(self):
        g = make_grid(48, 48.0)
        u0, B0 = gaussian_spectrum(g, InitSpec(kind="gaussian_spectrum", amplitude=0.01, seed=7))
        st = SolverState(u0, B0)
        params = PhysicsParams()
        ts = np.array([2.0, 4.0, 6.0])
        vals = []
        for t in ts:
            ev = linear_evolve(st, g, params, t)
            vals.append(spectral_l2_sq(ev.u_hat, g) + spectral_l2_sq(ev.B_hat, g))
        slope = np.polyfit(np.log(ts + 1), np.log(vals), 1)[0]
        assert slope == pytest.approx(-1.5, abs=0.05)

    def test_normalization_and_divergence(self):
        g = make_grid(32, 16.0)
        u0, B0 = gaussian_spectrum(g, InitSpec(kind="gaussian_spectrum", amplitude=0.02, seed=8))
        assert seminorm(u0, g, 0) == pytest.approx(0.02, rel=1e-12)
        assert divergence_residual(u0, g) <= 1e-12
        assert divergence_residual(B0, g) <= 1e-12


class TestRescaleSmall:
    def test_exact_target(self, g48):
        u0, B0 = gaussian_blob(g48, InitSpec(amplitude=0.3, seed=9))
        u1, B1, factor = rescale_small(u0, B0, g48, 1e-2, m=3)
        total = sobolev_norm(u1, g48, 3) + sobolev_norm(B1, g48, 3)
        assert total == pytest.approx(1e-2, rel=1e-14)
        assert factor > 0

    def test_identity_when_target_matches(self, g48):
        u0, B0 = gaussian_blob(g48, InitSpec(amplitude=0.3, seed=10))
        current = sobolev_norm(u0, g48, 3) + sobolev_norm(B0, g48, 3)
        u1, _, factor = rescale_small(u0, B0, g48, current, m=3)
        assert factor == pytest.approx(1.0, rel=1e-14)
        assert np.abs(u1 - u0).max() <= 1e-15 * np.abs(u0).max()

    def test_zero_fields_rejected(self, g48):
        z = np.zeros((3, 64, 64, 64), complex)
        with pytest.raises(ValueError):
            rescale_small(z, z, g48, 1e-2)


class TestAdmissibility:
    def test_blob_passes(self, g48):
        u0, B0 = gaussian_blob(g48, InitSpec(amplitude=0.1, seed=15))
        rep = admissibility_report(u0, B0, g48)
        assert rep.passed, rep.failures
        assert rep.per_field["u"]["l1"] > 0
        assert rep.per_field["B"]["l2"] > 0

    def test_constant_field_fails(self, g48):
        from hallmhd.grid import forward_transform

        c = np.zeros((3, 64, 64, 64))
        c[0] = 1.0
        s = forward_transform(c, g48)
        rep = admissibility_report(s, s.copy(), g48)
        assert not rep.passed
        assert any("boundary" in f for f in rep.failures)
        assert any("mean" in f for f in rep.failures)

    def test_wide_blob_fails_boundary(self, g48):
        u0, B0 = gaussian_blob(g48, InitSpec(width=12.0), enforce_localization=False)
        rep = admissibility_report(u0, B0, g48)
        assert not rep.passed
        assert any("boundary" in f for f in rep.failures)


def test_make_initial_fields_dispatch(g48):
    u0, _ = make_initial_fields(g48, InitSpec(kind="gaussian_blob", amplitude=0.1, seed=1))
    assert np.abs(u0).max() > 0
    u0, _ = make_initial_fields(
        g48, InitSpec(kind="random_band", amplitude=0.1, band=(0.8, 1.6), seed=1)
    )
    assert np.abs(u0).max() > 0
    u0, _ = make_initial_fields(g48, InitSpec(kind="gaussian_spectrum", amplitude=0.1, seed=1))
    assert np.abs(u0).max() > 0


def test_invalid_kind_rejected():
    with pytest.raises(ValueError):
        InitSpec(kind="vortex_ring")
