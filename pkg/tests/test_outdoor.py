import math

import numpy as np
import pytest
from scipy import integrate, stats

from beamlink.errors import ConvergenceError, DomainError
from beamlink.mathkit import RngStream
from beamlink.outdoor import (
    AlphaMuParams,
    AngularPointing,
    AoAParams,
    DisplacementPointing,
    FsoChannelSpec,
    MalagaParams,
    ThzAngularSpec,
    ThzDisplacementSpec,
    UavJitter,
    alpha_mu_mean,
    alpha_mu_pdf,
    alpha_mu_sample,
    angular_pointing_sample,
    aoa_interruption,
    displacement_pointing,
    fso_outage_semianalytic,
    fso_path_loss,
    malaga_mean,
    malaga_pdf,
    malaga_sample,
    outage_mc,
    thz_cdf_series,
    thz_path_loss,
    turbulent_beam_width,
    uav_fso_channel,
    uav_thz_channel,
    uav_variances,
    weather_presets,
)
from beamlink.outdoor import _series_kernel, _series_term_gamma_form

MALAGA = MalagaParams(los_power=1.3265, scatter_power=2 * 0.1079, coupling=0.596,
                      large_scale=2.5, small_scale=2)
RAYLEIGH = AlphaMuParams(alpha=2.0, mu=1, root_mean=1.0)


def chi_square_p(draws, cdf, bins=20):
    """Goodness of fit against equal-probability bins of the model CDF."""
    qs = np.linspace(0.0, 1.0, bins + 1)
    values = np.asarray(sorted(draws))
    model = cdf(values)
    counts, _ = np.histogram(model, bins=qs)
    expected = len(values) / bins
    stat = float(np.sum((counts - expected) ** 2 / expected))
    return float(stats.chi2.sf(stat, bins - 1))


class TestPathLoss:
    def test_beer_lambert(self):
        assert fso_path_loss(0.0, 123.0) == 1.0
        assert fso_path_loss(1e-3, 1000.0) == pytest.approx(math.exp(-1.0), rel=1e-12)

    def test_multiplicative_over_segments(self):
        xi = 2.3e-4
        assert fso_path_loss(xi, 700.0) * fso_path_loss(xi, 300.0) == pytest.approx(
            fso_path_loss(xi, 1000.0), rel=1e-12
        )

    def test_thz_spreading_anchor(self):
        g = thz_path_loss(350e9, 2.0, 1.0, 1.0, 0.0)
        assert 10 * math.log10(g**2) == pytest.approx(-89.35, abs=0.01)

    def test_thz_antenna_toggle(self):
        g0 = thz_path_loss(350e9, 100.0, include_antennas=False)
        gain = 10**5.5
        g1 = thz_path_loss(350e9, 100.0, gain, gain, include_antennas=True)
        assert 10 * math.log10((g1 / g0) ** 2) == pytest.approx(110.0, abs=1e-9)

    def test_thz_absorption(self):
        kappa = math.log(10.0) / 100.0
        g0 = thz_path_loss(350e9, 100.0, kappa=0.0, include_antennas=False)
        g1 = thz_path_loss(350e9, 100.0, kappa=kappa, include_antennas=False)
        assert 10 * math.log10((g1 / g0) ** 2) == pytest.approx(-10.0, abs=1e-9)

    def test_weather_presets_ordering(self):
        presets = weather_presets()
        assert (presets["clear"] < presets["light_fog"]
                < presets["moderate_rain"] < presets["heavy_rain"])


class TestTurbulentBeamWidth:
    def test_vacuum_reduction(self):
        w0, lam, length = 3.0, 1550e-9, 1000.0
        zr = math.pi * w0**2 / lam
        expected = w0 * math.sqrt(1.0 + (length / zr) ** 2)
        assert turbulent_beam_width(w0, lam, length, 0.0) == pytest.approx(expected, rel=1e-12)

    def test_monotone_in_cn2(self):
        vals = [turbulent_beam_width(3.0, 1550e-9, 1000.0, c)
                for c in (0.0, 1e-16, 1e-15, 1e-14, 1e-13)]
        assert all(b > a for a, b in zip(vals[:-1], vals[1:]))

    def test_dual_implementation(self):
        w0, lam, length, cn2 = 3.0, 1550e-9, 1000.0, 1e-14
        kf = 2.0 * math.pi / lam
        spread = 1.0 + 2.0 * w0**2 * (0.55 * cn2 * kf**2 * length) ** 0.6
        expected = w0 * math.sqrt(1.0 + spread * (length * lam / (math.pi * w0**2)) ** 2)
        assert turbulent_beam_width(w0, lam, length, cn2) == pytest.approx(expected, rel=1e-12)


class TestMalaga:
    def test_parameter_derivations(self):
        assert MALAGA.g == pytest.approx(0.08718, rel=1e-3)
        assert MALAGA.omega_prime == pytest.approx(2.28122, rel=1e-4)
        assert malaga_mean(MALAGA) == pytest.approx(2.3684, rel=1e-4)

    def test_pdf_normalisation(self):
        total, _ = integrate.quad(lambda h: malaga_pdf(MALAGA, h), 0, np.inf, limit=400)
        assert total == pytest.approx(1.0, abs=1e-6)

    def test_pdf_mean_matches_analytic(self):
        mean, _ = integrate.quad(lambda h: h * malaga_pdf(MALAGA, h), 0, np.inf, limit=400)
        assert mean == pytest.approx(malaga_mean(MALAGA), rel=1e-8)

    def test_small_h_behaviour(self):
        # leading order of each term is h^(min(eps, s) - 1): for eps > 1 the
        # s = 1 term dominates and the density approaches a finite constant
        tiny = malaga_pdf(MALAGA, 1e-12)
        assert np.isfinite(tiny) and tiny > 0.0
        assert malaga_pdf(MALAGA, 1e-14) == pytest.approx(tiny, rel=1e-3)
        diverging = MalagaParams(los_power=1.3265, scatter_power=2 * 0.1079,
                                 coupling=0.596, large_scale=0.5, small_scale=2)
        assert malaga_pdf(diverging, 1e-12) > malaga_pdf(diverging, 1e-6)

    def test_sampler_mean(self):
        draws = malaga_sample(MALAGA, RngStream(3, 1), size=1_000_000)
        assert draws.mean() == pytest.approx(malaga_mean(MALAGA), rel=0.01)

    def test_sampler_reproducible(self):
        a = malaga_sample(MALAGA, RngStream(3, 1), size=1000)
        b = malaga_sample(MALAGA, RngStream(3, 1), size=1000)
        assert np.array_equal(a, b)

    def test_chi_square_fit(self):
        draws = malaga_sample(MALAGA, RngStream(4, 2), size=100_000)
        grid = np.geomspace(draws.min() * 0.5, draws.max() * 1.1, 4096)
        pdf_vals = malaga_pdf(MALAGA, grid)
        cdf_grid = np.concatenate(([0.0], np.cumsum(np.diff(grid) * 0.5
                                                    * (pdf_vals[1:] + pdf_vals[:-1]))))

        def cdf(v):
            return np.interp(v, grid, cdf_grid)

        assert chi_square_p(draws, cdf) > 0.001

    def test_invalid_parameters(self):
        with pytest.raises(DomainError):
            MalagaParams(los_power=1.0, scatter_power=0.2, coupling=1.0,
                         large_scale=2.5, small_scale=2)
        with pytest.raises(DomainError):
            MalagaParams(los_power=1.0, scatter_power=0.2, coupling=0.5,
                         large_scale=2.5, small_scale=1.5)


class TestAlphaMu:
    def test_rayleigh_survival(self):
        draws = alpha_mu_sample(RAYLEIGH, RngStream(5, 0), size=100_000)
        assert float(np.mean(draws > 1.0)) == pytest.approx(math.exp(-1.0), abs=0.005)

    def test_alpha_root_moment(self):
        p = AlphaMuParams(alpha=3.1, mu=2, root_mean=1.7)
        draws = alpha_mu_sample(p, RngStream(5, 1), size=1_000_000)
        assert float(np.mean(draws**p.alpha)) == pytest.approx(p.root_mean**p.alpha, rel=0.01)

    def test_pdf_normalisation(self):
        total, _ = integrate.quad(lambda g: alpha_mu_pdf(RAYLEIGH, g), 0, np.inf)
        assert total == pytest.approx(1.0, abs=1e-8)

    def test_mean_formula(self):
        p = AlphaMuParams(alpha=2.0, mu=3, root_mean=1.2)
        mean, _ = integrate.quad(lambda g: g * alpha_mu_pdf(p, g), 0, np.inf)
        assert alpha_mu_mean(p) == pytest.approx(mean, rel=1e-9)

    def test_chi_square_fit(self):
        draws = alpha_mu_sample(RAYLEIGH, RngStream(5, 2), size=100_000)

        def cdf(v):
            return 1.0 - np.exp(-np.asarray(v) ** 2)

        assert chi_square_p(draws, cdf) > 0.001

    def test_mu_must_be_integer(self):
        with pytest.raises(DomainError):
            AlphaMuParams(alpha=2.0, mu=1.5, root_mean=1.0)


class TestDisplacementPointing:
    def test_anchor_values(self):
        p = DisplacementPointing(waist_at_rx=3.0, aperture_radius=0.05,
                                 displacement_std=1.5)
        assert p.v == pytest.approx(0.020889, rel=1e-4)
        assert p.a0 == pytest.approx(5.553e-4, rel=1e-3)

    def test_equivalent_waist_small_aperture_limit(self):
        p = DisplacementPointing(waist_at_rx=3.0, aperture_radius=1e-5,
                                 displacement_std=1.0)
        assert p.equivalent_waist == pytest.approx(3.0, rel=1e-6)

    def test_sampler_mean(self):
        p = DisplacementPointing(waist_at_rx=3.0, aperture_radius=0.05,
                                 displacement_std=1.5)
        draws = p.sample(RngStream(6, 0), size=1_000_000)
        assert draws.mean() == pytest.approx(p.mean(), rel=0.005)

    def test_concentration_for_large_xi(self):
        p = DisplacementPointing(waist_at_rx=3.0, aperture_radius=0.05,
                                 displacement_std=1e-6)
        draws = p.sample(RngStream(6, 1), size=10_000)
        assert np.all(np.abs(draws / p.a0 - 1.0) < 1e-3)

    def test_degenerate_sigma_returns_constant(self):
        p = DisplacementPointing(waist_at_rx=3.0, aperture_radius=0.05,
                                 displacement_std=0.0)
        assert p.sample(RngStream(0, 0)) == p.a0
        assert displacement_pointing(p).mean() == p.a0

    def test_analytic_mean_formula(self):
        p = DisplacementPointing(waist_at_rx=3.0, aperture_radius=0.05,
                                 displacement_std=1.5)
        mean, _ = integrate.quad(p.pdf, 0.0, p.a0, limit=200, weight=None)
        # integral of h * pdf
        mean_h, _ = integrate.quad(lambda h: h * p.pdf(h), 0.0, p.a0, limit=200)
        assert mean == pytest.approx(1.0, rel=1e-8)
        assert mean_h == pytest.approx(p.a0 * p.xi**2 / (p.xi**2 + 1.0), rel=1e-8)

    def test_chi_square_fit(self):
        p = DisplacementPointing(waist_at_rx=3.0, aperture_radius=0.05,
                                 displacement_std=1.5)
        draws = p.sample(RngStream(6, 2), size=100_000)
        assert chi_square_p(draws, p.cdf) > 0.001


class TestAoA:
    def test_anchor(self):
        p = AoAParams(fov=20e-3, aoa_std=10e-3, sides=2)
        a1, sampler = aoa_interruption(p)
        assert a1 == pytest.approx(math.exp(-2.0), rel=1e-12)
        draws = sampler(RngStream(7, 0), size=200_000)
        assert set(np.unique(draws)) <= {0.0, 1.0}
        assert float(np.mean(draws == 0.0)) == pytest.approx(a1, abs=0.005)

    def test_limits(self):
        steady = AoAParams(fov=20e-3, aoa_std=1e-9, sides=2)
        assert steady.interruption_probability == pytest.approx(0.0, abs=1e-300)
        blind = AoAParams(fov=1e-9, aoa_std=10e-3, sides=2)
        assert blind.interruption_probability == pytest.approx(1.0, rel=1e-9)


class TestAngularPointing:
    def test_zero_jitter_is_max_gain(self):
        p = AngularPointing(angle_stds=(1e-30,) * 4, beamwidths=(0.01,) * 4, max_gain=100.0)
        assert angular_pointing_sample(p, RngStream(8, 0)) == pytest.approx(100.0)

    def test_equal_xi_gives_unit_cg(self):
        p = AngularPointing(angle_stds=(1e-3,) * 4, beamwidths=(0.01,) * 4, max_gain=10.0)
        assert p.c_g == pytest.approx(1.0, rel=1e-12)

    def test_ula_approximations(self):
        p = AngularPointing.from_ula(80, 1e-3)
        assert p.max_gain == pytest.approx(math.pi * 80**2, rel=1e-12)
        assert p.max_gain == pytest.approx(2.011e4, rel=1e-3)
        assert p.beamwidths[0] == pytest.approx(1.061 / 80, rel=1e-12)
        assert p.beamwidths[0] == pytest.approx(0.013263, rel=1e-4)

    def test_samples_in_range(self):
        p = AngularPointing.from_ula(40, 2e-3)
        draws = angular_pointing_sample(p, RngStream(8, 1), size=10_000)
        assert np.all(draws > 0.0)
        assert np.all(draws <= p.max_gain)

    def test_mean_formula(self):
        p = AngularPointing.from_ula(40, (1e-3, 2e-3, 1.5e-3, 2.5e-3))
        draws = angular_pointing_sample(p, RngStream(8, 2), size=2_000_000)
        assert draws.mean() == pytest.approx(p.mean(), rel=0.005)


class TestSeriesCdf:
    def test_kernel_matches_printed_gamma_form(self):
        # the stable inner integral equals the binomial sum over upper
        # incomplete gammas from the printed closed form
        for a1, a3, xi_p in [(-122.3, 2.1, 0.0082), (-30.0, 8.0, 0.03), (-500.0, 0.5, 0.002)]:
            for k in (0, 1, 3, 8, 15):
                stable = _series_kernel(a1, a3, xi_p, k)
                printed = _series_term_gamma_form(a1, a3, xi_p, k, dps=60 + 3 * k)
                assert stable == pytest.approx(printed, rel=1e-11)

    def test_delta_seed_is_one(self):
        from beamlink.outdoor import _DeltaSeries

        d = _DeltaSeries((0.01, 0.02, 0.03, 0.04))
        assert d[0] == 1.0
        assert d[1] > 0.0

    def test_monotone_and_limits(self):
        p = AngularPointing.from_ula(80, (1.0e-3, 1.5e-3, 2.0e-3, 2.5e-3))
        hs = np.geomspace(1e-2, 0.999, 12) * p.max_gain * 5.0
        vals = [thz_cdf_series(p, RAYLEIGH, 5.0, float(h)) for h in hs]
        assert all(b >= a - 1e-12 for a, b in zip(vals[:-1], vals[1:]))
        assert all(0.0 <= v <= 1.0 for v in vals)
        assert thz_cdf_series(p, RAYLEIGH, 5.0, p.max_gain * 5.0 * 50.0) > 0.999999

    def test_matches_monte_carlo(self):
        p = AngularPointing.from_ula(80, (1.0e-3, 1.5e-3, 2.0e-3, 2.5e-3))
        spec = ThzAngularSpec(path_gain=1.0, pointing=p, fading=RAYLEIGH)
        n = 200_000
        draws = spec.sample(RngStream(9, 0), n)
        for q in np.quantile(draws, [0.2, 0.5, 0.8]):
            emp = float(np.mean(draws < q))
            ser = thz_cdf_series(p, RAYLEIGH, 1.0, float(q))
            assert abs(ser - emp) < 3.0 * math.sqrt(emp * (1 - emp) / n)

    def test_truncation_tolerance_validated(self):
        p = AngularPointing.from_ula(80, 1e-3)
        with pytest.raises(DomainError):
            thz_cdf_series(p, RAYLEIGH, 1.0, 1.0, truncation_tol=0.0)


class TestOutageMc:
    def test_zero_threshold(self):
        spec = FsoChannelSpec(path_loss=0.9, turbulence=MALAGA)
        p, se = outage_mc(spec, 10.0, 0.0, 10_000, RngStream(10, 0))
        assert p == 0.0 and se == 0.0

    def test_deterministic_step(self):
        spec = FsoChannelSpec(path_loss=0.7)  # no stochastic parts: h = h_ref
        th = 1.0
        p_low, _ = outage_mc(spec, 2.0 * th, th, 1000, RngStream(10, 1))
        p_high, _ = outage_mc(spec, th / 2.0, th, 1000, RngStream(10, 1))
        assert p_low == 0.0
        assert p_high == 1.0

    def test_seed_reproducible(self):
        spec = FsoChannelSpec(path_loss=0.9, turbulence=MALAGA)
        a = outage_mc(spec, 5.0, 1.0, 50_000, RngStream(11, 7))
        b = outage_mc(spec, 5.0, 1.0, 50_000, RngStream(11, 7))
        assert a == b

    def test_shared_randomness_monotone_in_avg_snr(self):
        pointing = DisplacementPointing(waist_at_rx=3.0, aperture_radius=0.05,
                                        displacement_std=1.5)
        spec = FsoChannelSpec(path_loss=0.9, turbulence=MALAGA, pointing=pointing)
        outs = [outage_mc(spec, 10 ** (s / 10), 10 ** 0.5, 100_000, RngStream(12, 3))[0]
                for s in (5, 10, 15, 20, 25, 30)]
        assert all(a >= b for a, b in zip(outs[:-1], outs[1:]))

    def test_shared_randomness_monotone_in_jitter(self):
        outs = []
        for sigma in (0.5, 1.0, 1.5, 2.5):
            pointing = DisplacementPointing(waist_at_rx=3.0, aperture_radius=0.05,
                                            displacement_std=sigma)
            spec = FsoChannelSpec(path_loss=0.9, pointing=pointing)
            outs.append(outage_mc(spec, 100.0, 10 ** 0.5, 100_000, RngStream(12, 4))[0])
        assert all(a <= b for a, b in zip(outs[:-1], outs[1:]))

    def test_fso_composition_order_independent(self):
        pointing = DisplacementPointing(waist_at_rx=3.0, aperture_radius=0.05,
                                        displacement_std=1.5)
        aoa = AoAParams(fov=20e-3, aoa_std=10e-3, sides=2)
        spec = FsoChannelSpec(path_loss=0.9, turbulence=MALAGA, pointing=pointing, aoa=aoa)
        draws = spec.sample(RngStream(13, 0), 1000)
        assert np.all(draws >= 0.0)
        assert spec.reference_gain == pytest.approx(
            0.9 * malaga_mean(MALAGA) * pointing.a0 * (1 - aoa.interruption_probability),
            rel=1e-12,
        )


class TestSemiAnalyticOracle:
    def test_matches_monte_carlo(self):
        pointing = DisplacementPointing(waist_at_rx=3.0, aperture_radius=0.05,
                                        displacement_std=1.5)
        aoa = AoAParams(fov=20e-3, aoa_std=10e-3, sides=2)
        spec = FsoChannelSpec(
            path_loss=fso_path_loss(weather_presets()["clear"], 1000.0),
            turbulence=MALAGA, pointing=pointing, aoa=aoa,
        )
        n = 400_000
        threshold = 10 ** 0.5
        for snr_db in (6, 12, 18, 24):
            avg = 10 ** (snr_db / 10)
            mc, se = outage_mc(spec, avg, threshold, n, RngStream(14, snr_db))
            exact = fso_outage_semianalytic(spec, avg, threshold)
            assert abs(mc - exact) < max(3.0 * se, 1e-4)

    def test_zero_threshold_convention(self):
        spec = FsoChannelSpec(path_loss=0.9, turbulence=MALAGA)
        assert fso_outage_semianalytic(spec, 10.0, 0.0) == 0.0


class TestUav:
    def test_g2u_additive_displacement(self):
        j = UavJitter(position_stds=(0.1, 0.2, 0.3, 0.4),
                      orientation_stds=(1e-3,) * 4, link_type="g2u")
        sm2, _ = uav_variances(j, 200.0)
        assert sm2 == pytest.approx(0.1**2 + 0.3**2 + 0.2**2 + 0.4**2, rel=1e-12)

    def test_u2u_symmetric_reduction(self):
        # zero boresight and equal axes: the cubic mix collapses to sigma^2
        j = UavJitter(position_stds=(0.1, 0.1, 0.1, 0.1),
                      orientation_stds=(2e-3, 2e-3, 2e-3, 2e-3), link_type="u2u")
        length = 150.0
        sm2, sa2 = uav_variances(j, length)
        sdx2 = length**2 * (2e-3) ** 2 + 2 * 0.1**2
        assert sm2 == pytest.approx(sdx2, rel=1e-12)
        assert sa2 == pytest.approx(2 * (2e-3) ** 2, rel=1e-12)

    def test_ordering_of_link_types(self):
        for link in ("g2u", "u2g", "u2u"):
            j = UavJitter(position_stds=(0.3, 0.3, 0.3, 0.3),
                          orientation_stds=(3e-3,) * 4, link_type=link)
        g2u = uav_variances(UavJitter(position_stds=(0.0, 0.0, 0.3, 0.3),
                                      orientation_stds=(0.0, 0.0, 3e-3, 3e-3),
                                      link_type="g2u"), 200.0)[0]
        u2g = uav_variances(UavJitter(position_stds=(0.3, 0.3, 0.0, 0.0),
                                      orientation_stds=(3e-3, 3e-3, 0.0, 0.0),
                                      link_type="u2g"), 200.0)[0]
        u2u = uav_variances(UavJitter(position_stds=(0.3,) * 4,
                                      orientation_stds=(3e-3,) * 4,
                                      link_type="u2u"), 200.0)[0]
        assert g2u < u2g < u2u

    def test_channel_builders(self):
        j = UavJitter(position_stds=(0.3,) * 4, orientation_stds=(3e-3,) * 4,
                      link_type="u2u")
        fso = uav_fso_channel(j, 200.0, wavelength=1550e-9, beam_waist=3.0, cn2=1e-14,
                              aperture_radius=0.05, fov=0.02, turbulence=MALAGA,
                              attenuation=weather_presets()["light_fog"])
        assert fso.aoa is not None and fso.aoa.sides == 4
        p, _ = outage_mc(fso, 100.0, 10 ** 0.5, 20_000, RngStream(15, 0))
        assert 0.0 <= p <= 1.0

        thz = uav_thz_channel(j, 200.0, frequency=350e9, n_antennas=80,
                              fading=RAYLEIGH, kappa=1e-3)
        sm2, _ = uav_variances(j, 200.0)
        assert thz.pointing.angle_stds[0] == pytest.approx(math.sqrt(sm2) / 200.0, rel=1e-12)
        p2, _ = outage_mc(thz, 100.0, 10 ** 0.5, 20_000, RngStream(15, 1))
        assert 0.0 <= p2 <= 1.0

    def test_invalid_link_type(self):
        with pytest.raises(DomainError):
            UavJitter(link_type="orbit")
