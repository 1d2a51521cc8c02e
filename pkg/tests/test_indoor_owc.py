import math

import numpy as np
import pytest

from beamlink.errors import DomainError, GeometryError, InfeasiblePowerError
from beamlink.geometry import DOWNLINK, LinkFrame, Pose, link_misalignment
from beamlink.indoor_owc import (
    GaussianBeam,
    PhotoDetector,
    VcselLiv,
    beam_spot,
    cf_owc,
    channel_gain_owc,
    cpc_gain,
    hpbd_after_lens,
    owc_noise_variance,
    owc_snr,
    pd_bandwidth_area,
    transmitter_power,
    vcsel_liv,
    vcsel_liv_inverse,
)

TABLE1_BEAM = GaussianBeam(wavelength=940e-9, primary_waist=2.523e-6)
TABLE1_VCSEL = VcselLiv(
    efficiency=0.66,
    threshold_current=2e-3,
    saturation_power=14.6e-3,
    curve_fineness=2.0,
    bias_voltage=2.7,
    bias_tee_efficiency=10 ** (-0.1),
)


def table1_pd(area=2.636e-6, cpc_deg=0.0):
    return PhotoDetector(
        area=area,
        load_resistance=50.0,
        responsivity=0.6,
        cpc_half_angle=math.radians(cpc_deg),
        tia_noise_figure_db=5.0,
        rin_db_hz=-155.0,
    )


def ceiling_link(tilt_deg=0.0, tilt_azimuth_deg=0.0, dx=0.0, dy=0.0, rx_tilt_deg=0.0,
                 length=2.0):
    tx = Pose(
        (1.5 + dx, 1.5 + dy, 0.95 + length),
        azimuth=math.radians(tilt_azimuth_deg),
        elevation=-math.pi / 2 + math.radians(tilt_deg),
    )
    rx = Pose((1.5, 1.5, 0.95), elevation=math.pi / 2 - math.radians(rx_tilt_deg))
    return tx, rx


class TestBeamSpot:
    def test_aligned_width_anchor(self):
        tx, rx = ceiling_link()
        w_sq, rho_sq = beam_spot(TABLE1_BEAM, tx, rx, (0.0, 0.0), DOWNLINK)
        # far field: w ~ w0 L / z_R with z_R = 2.127e-5 m
        assert math.sqrt(float(w_sq)) == pytest.approx(0.2372, rel=1e-3)
        assert float(rho_sq) == pytest.approx(0.0, abs=1e-18)

    def test_zero_misalignment_reduction(self):
        tx, rx = ceiling_link()
        w_sq, _ = beam_spot(TABLE1_BEAM, tx, rx, (0.0, 0.0), DOWNLINK)
        zr = TABLE1_BEAM.rayleigh_range
        expected = TABLE1_BEAM.waist**2 * (1.0 + (2.0 / zr) ** 2)
        assert float(w_sq) == pytest.approx(expected, rel=1e-12)

    def test_width_floor_and_nonnegative_offset(self):
        tx, rx = ceiling_link(tilt_deg=7.0, dx=0.1, dy=-0.05, rx_tilt_deg=3.0)
        x = np.linspace(-0.01, 0.01, 7)
        y = np.linspace(-0.01, 0.01, 7)
        w_sq, rho_sq = beam_spot(TABLE1_BEAM, tx, rx, (x, y), DOWNLINK)
        assert np.all(w_sq >= TABLE1_BEAM.waist**2)
        assert np.all(rho_sq >= 0.0)

    def test_matched_azimuths_remove_x_dependence(self):
        # c2 = cos(phi_e_t) sin(phi_a_t - phi_a_r) vanishes when the azimuths match
        from beamlink.geometry import Misalignment
        from beamlink.indoor_owc import _spot_fields

        mis = Misalignment(length=2.0, tx_azimuth=0.15, tx_elevation=0.08,
                           rx_azimuth=0.15, rx_elevation=0.0)
        xs = np.linspace(-0.02, 0.02, 9)
        w_sq, _ = _spot_fields(TABLE1_BEAM, mis, xs, np.zeros_like(xs))
        assert np.allclose(w_sq, w_sq[0], rtol=1e-12)

    def test_coincident_poses_error(self):
        p = Pose((1.0, 1.0, 1.0), elevation=-math.pi / 2)
        with pytest.raises(GeometryError):
            beam_spot(TABLE1_BEAM, p, p, (0.0, 0.0), DOWNLINK)


class TestChannelGain:
    def test_huge_aperture_captures_everything(self):
        tx, rx = ceiling_link()
        w = 0.23719
        pd = PhotoDetector(area=math.pi * (10 * w) ** 2, load_resistance=50.0,
                           responsivity=0.6)
        assert channel_gain_owc(TABLE1_BEAM, tx, rx, pd, frame=DOWNLINK) == pytest.approx(
            1.0, abs=1e-6
        )

    @pytest.mark.parametrize("radius", [2e-4, 5e-4, 9.1610e-4, 2e-3, 5e-3])
    def test_concentric_closed_form(self, radius):
        tx, rx = ceiling_link()
        pd = PhotoDetector(area=math.pi * radius**2, load_resistance=50.0, responsivity=0.6)
        gain = channel_gain_owc(TABLE1_BEAM, tx, rx, pd, frame=DOWNLINK)
        w_sq, _ = beam_spot(TABLE1_BEAM, tx, rx, (0.0, 0.0), DOWNLINK)
        closed = 1.0 - math.exp(-2.0 * radius**2 / float(w_sq))
        assert gain == pytest.approx(closed, abs=1e-6)
        assert gain == pytest.approx(closed, rel=1e-6)

    def test_spec_example_value(self):
        # aperture of 2.64 mm^2 at 2 m: capture fraction about 2.99e-5
        tx, rx = ceiling_link()
        gain = channel_gain_owc(TABLE1_BEAM, tx, rx, table1_pd(), frame=DOWNLINK)
        assert gain == pytest.approx(2.99e-5, rel=5e-3)

    def test_rx_rotated_away_is_dark(self):
        tx, rx = ceiling_link(rx_tilt_deg=90.0)
        gain = channel_gain_owc(TABLE1_BEAM, tx, rx, table1_pd(cpc_deg=3.0), frame=DOWNLINK)
        assert gain < 1e-12

    def test_tilt_monotone_past_alignment(self):
        pd = table1_pd(cpc_deg=4.0)
        gains = []
        for tilt in [0.0, 0.5, 1.0, 2.0, 3.0, 3.9, 4.5, 8.0, 15.0]:
            tx, rx = ceiling_link(tilt_deg=tilt)
            gains.append(channel_gain_owc(TABLE1_BEAM, tx, rx, pd, frame=DOWNLINK))
        assert all(a >= b for a, b in zip(gains[:-1], gains[1:]))
        assert gains[-1] == 0.0  # outside the CPC acceptance cone

    def test_rotation_about_link_axis_invariant(self):
        pd = table1_pd()
        reference = None
        for az in [0.0, 37.0, 90.0, 213.0]:
            tx, rx = ceiling_link(tilt_deg=2.0, tilt_azimuth_deg=az)
            gain = channel_gain_owc(TABLE1_BEAM, tx, rx, pd, frame=DOWNLINK)
            if reference is None:
                reference = gain
            else:
                assert gain == pytest.approx(reference, rel=1e-9)

    def test_displacement_matches_offset_quadrature(self):
        # pure x displacement must equal a quadrature of the same Gaussian
        # shifted by the displacement, for several random offsets
        from beamlink.mathkit import integrate_disk

        pd = table1_pd()
        radius = math.sqrt(pd.area / math.pi)
        tx0, rx0 = ceiling_link()
        w_sq, _ = beam_spot(TABLE1_BEAM, tx0, rx0, (0.0, 0.0), DOWNLINK)
        w2 = float(w_sq)
        rng = np.random.default_rng(5)
        for dx in rng.uniform(-0.2, 0.2, 10):
            tx, rx = ceiling_link(dx=float(dx))
            gain = channel_gain_owc(TABLE1_BEAM, tx, rx, pd, frame=DOWNLINK)

            def shifted(x, y, dx=dx):
                return 2.0 / (math.pi * w2) * np.exp(
                    -2.0 * ((x + dx) ** 2 + y**2) / w2
                )

            expected = integrate_disk(shifted, (0.0, 0.0), radius)
            assert gain == pytest.approx(expected, rel=1e-6, abs=1e-30)


class TestOptics:
    def test_hpbd_anchors(self):
        assert math.degrees(hpbd_after_lens(TABLE1_BEAM)) == pytest.approx(8.00, abs=0.01)
        beam2 = GaussianBeam(940e-9, 2.523e-6, lens_magnification=2.0)
        assert math.degrees(hpbd_after_lens(beam2)) == pytest.approx(4.00, abs=0.01)

    def test_hpbd_decreasing_in_magnification(self):
        mags = [1.0, 1.5, 2.0, 4.0, 10.0, 100.0]
        vals = [hpbd_after_lens(GaussianBeam(940e-9, 2.523e-6, m)) for m in mags]
        assert all(a > b for a, b in zip(vals[:-1], vals[1:]))
        assert vals[-1] < 0.002

    def test_pd_tradeoff_anchor(self):
        pd = table1_pd()
        area = pd_bandwidth_area(pd, "area-from-bandwidth", 500e6)
        assert area == pytest.approx(2.636e-6, rel=1e-3)
        back = pd_bandwidth_area(pd, "bandwidth-from-area", area)
        assert back == pytest.approx(500e6, rel=1e-12)

    def test_pd_tradeoff_square_root_law(self):
        pd = table1_pd()
        b1 = pd_bandwidth_area(pd, "bandwidth-from-area", 1e-6)
        b2 = pd_bandwidth_area(pd, "bandwidth-from-area", 4e-6)
        assert b1 == pytest.approx(2.0 * b2, rel=1e-12)

    def test_pd_tradeoff_domain(self):
        with pytest.raises(DomainError):
            pd_bandwidth_area(table1_pd(), "area-from-bandwidth", 0.0)
        with pytest.raises(DomainError):
            pd_bandwidth_area(table1_pd(), "sideways", 1.0)

    def test_cpc_gain_anchors(self):
        gain, factor = cpc_gain(math.radians(30.0))
        assert gain == pytest.approx(4.0, rel=1e-12)
        assert factor == pytest.approx(math.pi, rel=1e-12)
        gain3, _ = cpc_gain(math.radians(3.0))
        assert gain3 == pytest.approx(365.1, rel=1e-3)

    def test_cpc_domain(self):
        with pytest.raises(DomainError):
            cpc_gain(0.0)
        with pytest.raises(DomainError):
            cpc_gain(math.pi / 2)

    def test_effective_area_boost(self):
        pd = table1_pd(cpc_deg=3.0)
        assert pd.effective_area() > pd.area

    def test_overly_wide_cpc_rejected(self):
        with pytest.raises(DomainError):
            PhotoDetector(area=1e-6, load_resistance=50.0, responsivity=0.6,
                          cpc_half_angle=math.radians(80.0))


class TestNoiseAndSnr:
    def test_thermal_only_anchor(self):
        sigma = owc_noise_variance(table1_pd(), 1e9, 295.0, 0.0)
        assert sigma == pytest.approx(1.0304e-12, rel=1e-3)

    def test_thermal_linearity_in_bandwidth(self):
        s1 = owc_noise_variance(table1_pd(), 1e9, 295.0, 0.0)
        s2 = owc_noise_variance(table1_pd(), 2e9, 295.0, 0.0)
        assert s2 == pytest.approx(2.0 * s1, rel=1e-12)

    def test_terms_nonnegative_and_increasing(self):
        pd = table1_pd()
        base = owc_noise_variance(pd, 1e9, 295.0, 1e-4)
        assert owc_noise_variance(pd, 1.5e9, 295.0, 1e-4) > base
        assert owc_noise_variance(pd, 1e9, 350.0, 1e-4) > base
        assert owc_noise_variance(pd, 1e9, 295.0, 2e-4) > base

    def test_zero_power_zero_snr(self):
        tx, rx = ceiling_link()
        assert owc_snr(TABLE1_BEAM, tx, rx, table1_pd(), 0.0, 1e9, 295.0,
                       frame=DOWNLINK) == 0.0

    def test_thermal_limited_slope_two(self):
        tx, rx = ceiling_link()
        pd = table1_pd()
        s1 = owc_snr(TABLE1_BEAM, tx, rx, pd, 1e-6, 1e9, 295.0, frame=DOWNLINK)
        s2 = owc_snr(TABLE1_BEAM, tx, rx, pd, 2e-6, 1e9, 295.0, frame=DOWNLINK)
        assert s2 / s1 == pytest.approx(4.0, rel=1e-3)

    def test_golden_dual_implementation(self):
        # independent scripted assembly of the same formulas: closed-form
        # concentric capture, hand-built noise terms
        beam = GaussianBeam(940e-9, 2.523e-6, lens_magnification=2.0)
        bandwidth, temperature, p_t = 1e9, 295.0, 1e-3
        pd = PhotoDetector(
            area=pd_bandwidth_area(table1_pd(), "area-from-bandwidth", bandwidth),
            load_resistance=50.0,
            responsivity=0.6,
            cpc_half_angle=math.radians(2.0),
            tia_noise_figure_db=5.0,
            rin_db_hz=-155.0,
        )
        tx, rx = ceiling_link()
        value = owc_snr(beam, tx, rx, pd, p_t, bandwidth, temperature, frame=DOWNLINK)

        w = beam.waist * math.sqrt(1.0 + (2.0 / beam.rayleigh_range) ** 2)
        r_eff = math.sqrt(pd.effective_area() / math.pi)
        h = 1.0 - math.exp(-2.0 * r_eff**2 / w**2)
        k, q = 1.380649e-23, 1.602176634e-19
        sigma = (
            4 * k * temperature * bandwidth * 10 ** 0.5 / 50.0
            + 2 * q * bandwidth * 0.6 * h * p_t
            + bandwidth * 10 ** (-15.5) * (0.6 * h * p_t) ** 2
        )
        expected = (0.6 * h) ** 2 * (p_t**2 / 9.0) / sigma
        assert value == pytest.approx(expected, rel=1e-6)

    def test_snr_tilt_monotonicity_grid(self):
        beam = GaussianBeam(940e-9, 2.523e-6, lens_magnification=2.0)
        pd = table1_pd(cpc_deg=2.0)
        snrs = []
        for tilt in np.linspace(0.0, 15.0, 16):
            tx, rx = ceiling_link(tilt_deg=float(tilt))
            snrs.append(owc_snr(beam, tx, rx, pd, 1e-3, 1e9, 295.0, frame=DOWNLINK))
        assert all(a >= b for a, b in zip(snrs[:-1], snrs[1:]))


class TestVcsel:
    def test_threshold(self):
        assert vcsel_liv(TABLE1_VCSEL, 2e-3) == 0.0
        assert vcsel_liv(TABLE1_VCSEL, 1e-3) == 0.0

    def test_ten_ma_anchor(self):
        assert vcsel_liv(TABLE1_VCSEL, 10e-3) == pytest.approx(5.2577e-3, rel=1e-4)

    def test_saturation_asymptote(self):
        assert vcsel_liv(TABLE1_VCSEL, 10.0) == pytest.approx(14.6e-3, rel=1e-6)
        assert vcsel_liv(TABLE1_VCSEL, 1.0) < 14.6e-3

    def test_monotone(self):
        currents = np.linspace(0.0, 0.1, 200)
        powers = [vcsel_liv(TABLE1_VCSEL, float(i)) for i in currents]
        assert all(b >= a for a, b in zip(powers[:-1], powers[1:]))

    def test_inverse_anchor(self):
        assert vcsel_liv_inverse(TABLE1_VCSEL, 5.2577e-3) == pytest.approx(10e-3, rel=1e-4)

    def test_inverse_at_zero_returns_threshold(self):
        assert vcsel_liv_inverse(TABLE1_VCSEL, 0.0) == TABLE1_VCSEL.threshold_current

    def test_round_trip_identity(self):
        for p in np.linspace(1e-5, 0.999 * 14.6e-3, 50):
            i = vcsel_liv_inverse(TABLE1_VCSEL, float(p))
            assert vcsel_liv(TABLE1_VCSEL, i) == pytest.approx(float(p), rel=1e-9)
            assert i >= TABLE1_VCSEL.threshold_current

    def test_saturation_infeasible(self):
        with pytest.raises(InfeasiblePowerError):
            vcsel_liv_inverse(TABLE1_VCSEL, 14.6e-3)
        with pytest.raises(InfeasiblePowerError):
            vcsel_liv_inverse(TABLE1_VCSEL, 20e-3)


class TestConsumptionFactor:
    def test_zero_snr_zero_cf(self):
        assert cf_owc(0.0, 1e9, TABLE1_VCSEL, 1e-3, others_power=0.1) == 0.0

    def test_unit_case(self):
        # gamma = 1, B = 1 Hz, total power 1 W -> 1 bit/s/W
        liv = VcselLiv(efficiency=1.0, threshold_current=1e-9, saturation_power=1e9,
                       curve_fineness=1.0, bias_voltage=1.0)
        drive = vcsel_liv_inverse(liv, 0.5)
        others = 1.0 - drive * 1.0
        assert cf_owc(1.0, 1.0, liv, 0.5, others_power=others) == pytest.approx(1.0, rel=1e-6)

    def test_transmitter_power_composition(self):
        expected = vcsel_liv_inverse(TABLE1_VCSEL, 1e-3) * 2.7 / 10 ** (-0.1)
        assert transmitter_power(TABLE1_VCSEL, 1e-3) == pytest.approx(expected, rel=1e-12)

    def test_cf_unimodal_in_power(self):
        tx, rx = ceiling_link()
        beam = GaussianBeam(940e-9, 2.523e-6, lens_magnification=2.0)
        pd = table1_pd(cpc_deg=2.0)
        powers = np.geomspace(1e-5, 0.99 * 14.6e-3, 40)
        cfs = []
        for p in powers:
            snr = owc_snr(beam, tx, rx, pd, float(p), 1e9, 295.0, frame=DOWNLINK)
            cfs.append(cf_owc(snr, 1e9, TABLE1_VCSEL, float(p), others_power=0.1))
        peak = int(np.argmax(cfs))
        assert 0 < peak < len(cfs) - 1
        assert all(a <= b * (1 + 1e-12) for a, b in zip(cfs[:peak], cfs[1:peak + 1]))
        assert all(a >= b * (1 - 1e-12) for a, b in zip(cfs[peak:-1], cfs[peak + 1:]))

    def test_requires_positive_others_power(self):
        with pytest.raises(DomainError):
            cf_owc(1.0, 1e9, TABLE1_VCSEL, 1e-3, others_power=0.0)
