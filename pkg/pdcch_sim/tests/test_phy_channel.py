import math

import numpy as np
import pytest

from pdcch_sim.src.dci_codec import Standard
from pdcch_sim.src.phy_channel import (
    ChannelModel,
    ChannelProfile,
    ChannelRealization,
    Numerology,
    apply_awgn,
    apply_channel,
    max_delay_spread,
    max_pilot_symbol_gap,
    noise_variance,
    ofdm_demodulate,
    ofdm_modulate,
    realize_tdl,
)
from pdcch_sim.src.resource_map import CoresetConfig, CyclicPrefix, ResourceGrid, map_to_grid
from pdcch_sim.utils.errors import ConfigurationError, FormatError

NR_AL1 = CoresetConfig(Standard.NR, 1)
NUM = Numerology.for_coreset(NR_AL1)


def _random_grid(cfg: CoresetConfig, seed: int) -> ResourceGrid:
    rng = np.random.default_rng(seed)
    symbols = rng.standard_normal(cfg.control_res) + 1j * rng.standard_normal(cfg.control_res)
    return map_to_grid(symbols / np.sqrt(2), cfg)


def _static_two_tap(samples: int) -> ChannelRealization:
    taps = np.array([[0.8], [0.3 - 0.4j]]) * np.ones((2, samples))
    return ChannelRealization(taps, np.array([0, 5]))


# Numerology


def test_numerology_defaults_at_5mhz():
    assert NUM.fft_size == 512
    assert NUM.sample_rate == pytest.approx(7.68e6)
    assert NUM.cp_lengths[:2] == (40, 36)
    assert NUM.cp_lengths[7] == 40
    assert NUM.samples_for(14) == 7680


def test_extended_cp_numerology():
    num = Numerology.for_coreset(CoresetConfig(Standard.LTE, 1, coreset_symbols=2))
    assert num.cyclic_prefix is CyclicPrefix.EXTENDED
    assert num.cp_lengths == (128,) * 12
    assert num.samples_for(12) == 7680


def test_wideband_numerology_uses_2048_fft():
    cfg = CoresetConfig(Standard.NR, 16, bandwidth_mhz=20.0)
    assert Numerology.for_coreset(cfg).fft_size == 2048


# OFDM


def test_ofdm_round_trip_all_symbols():
    grid = _random_grid(NR_AL1, 1)
    back = ofdm_demodulate(ofdm_modulate(grid, NUM), NUM, ResourceGrid.empty(NR_AL1))
    assert np.allclose(back.cells, grid.cells, atol=1e-12)


def test_ofdm_round_trip_control_symbols_only():
    grid = _random_grid(NR_AL1, 2)
    samples = ofdm_modulate(grid, NUM, 3)
    assert samples.size == NUM.samples_for(3)
    back = ofdm_demodulate(samples, NUM, ResourceGrid.empty(NR_AL1))
    assert np.allclose(back.cells, grid.cells, atol=1e-12)


def test_ofdm_zero_grid_gives_zero_samples():
    assert not ofdm_modulate(ResourceGrid.empty(NR_AL1), NUM).any()


def test_ofdm_modulation_preserves_energy():
    grid = _random_grid(NR_AL1, 3)
    samples = ofdm_modulate(grid, NUM, 3)
    bodies = samples[NUM.body_starts(3)[:, None] + np.arange(NUM.fft_size)]
    assert np.sum(np.abs(bodies) ** 2) == pytest.approx(grid.total_power())


def test_cyclic_prefix_repeats_symbol_tail():
    grid = _random_grid(NR_AL1, 4)
    samples = ofdm_modulate(grid, NUM)
    starts = NUM.body_starts(NUM.symbols_per_slot)
    for start, cp in zip(starts, NUM.cp_lengths, strict=True):
        end = start + NUM.fft_size
        assert np.array_equal(samples[start - cp : start], samples[end - cp : end])


def test_frequency_shift_moves_subcarrier_index():
    grid = ResourceGrid.empty(NR_AL1)
    grid.cells[10, 0] = 1.0
    samples = ofdm_modulate(grid, NUM, 1)
    n = np.arange(samples.size) - NUM.cp_lengths[0]
    shifted = samples * np.exp(2j * np.pi * n / NUM.fft_size)
    back = ofdm_demodulate(shifted, NUM, ResourceGrid.empty(NR_AL1))
    assert abs(back.cells[11, 0]) == pytest.approx(1.0)
    assert abs(back.cells[10, 0]) == pytest.approx(0.0, abs=1e-12)


def test_ofdm_rejects_mismatched_inputs():
    lte_grid = ResourceGrid.empty(CoresetConfig(Standard.LTE, 1, coreset_symbols=2))
    with pytest.raises(ConfigurationError):
        ofdm_modulate(lte_grid, NUM)
    with pytest.raises(FormatError):
        ofdm_demodulate(np.zeros(100, dtype=complex), NUM, ResourceGrid.empty(NR_AL1))


# Noise


def test_noise_variance():
    assert noise_variance(1.0, 0.0) == 1.0
    assert noise_variance(2.0, 10.0) == pytest.approx(0.2)
    assert noise_variance(1.0, math.inf) == 0.0


def test_apply_awgn_power_and_determinism():
    samples = np.zeros(200_000, dtype=complex)
    noisy = apply_awgn(samples, 3.0, seed=5)
    assert np.mean(np.abs(noisy) ** 2) == pytest.approx(10 ** -0.3, rel=0.02)
    assert np.array_equal(noisy, apply_awgn(samples, 3.0, seed=5))
    assert np.array_equal(apply_awgn(samples, math.inf, seed=5), samples)


# Fading


def test_max_doppler():
    assert ChannelProfile.named("tdl-a", speed_kmh=3).max_doppler == pytest.approx(1.94, abs=0.01)
    assert ChannelProfile.named("tdl-a", speed_kmh=120).max_doppler == pytest.approx(77.8, abs=0.1)


def test_named_profiles():
    tdl_c = ChannelProfile.named("TDL-C")
    assert tdl_c.model is ChannelModel.TDL_C
    assert tdl_c.delay_spread == pytest.approx(300e-9)
    assert tdl_c.tap_powers().sum() == pytest.approx(1.0)
    assert ChannelProfile.named("awgn").pdp == ()
    with pytest.raises(ConfigurationError):
        ChannelProfile.named("rician")


def test_pdp_csv_profile(tmp_path):
    path = tmp_path / "pdp.csv"
    path.write_text("delay_ns,power_db\n0,0\n200,-3\n")
    profile = ChannelProfile.named("tdl-a").with_pdp_csv(path)
    assert profile.tap_delays() == pytest.approx([0.0, 200e-9])
    assert profile.tap_powers()[0] > profile.tap_powers()[1]


def test_pdp_csv_errors(tmp_path):
    with pytest.raises(ConfigurationError):
        ChannelProfile.named("tdl-a").with_pdp_csv(tmp_path / "missing.csv")
    bad = tmp_path / "bad.csv"
    bad.write_text("delay,power\n0,0\n")
    with pytest.raises(FormatError):
        ChannelProfile.named("tdl-a").with_pdp_csv(bad)


def test_tdl_average_power_is_unity():
    profile = ChannelProfile.named("tdl-a", speed_kmh=30)
    total = [
        np.sum(np.abs(realize_tdl(profile, 1, NUM, seed).taps[:, 0]) ** 2)
        for seed in range(8000)
    ]
    assert np.mean(total) == pytest.approx(1.0, abs=0.03)


def test_doppler_spectrum_peaks_at_max_doppler():
    # one tap at 30 GHz and 360 km/h puts the Doppler edge near 10 kHz
    profile = ChannelProfile(ChannelModel.TDL_A, 1e-9, 360.0, 30e9, ((0.0, 0.0),))
    d_max = profile.max_doppler
    n = 1 << 15
    window = np.hanning(n)
    spectrum = np.zeros(n)
    for seed in range(16):
        tap = realize_tdl(profile, n, NUM, seed).taps[0]
        spectrum += np.abs(np.fft.fft(tap * window)) ** 2
    freqs = np.fft.fftfreq(n, 1.0 / NUM.sample_rate)
    positive, negative = freqs > 0, freqs < 0
    peak_up = freqs[positive][np.argmax(spectrum[positive])]
    peak_down = freqs[negative][np.argmax(spectrum[negative])]
    assert peak_up == pytest.approx(d_max, rel=0.05)
    assert peak_down == pytest.approx(-d_max, rel=0.05)
    assert spectrum[np.abs(freqs) > 1.2 * d_max].sum() < 1e-3 * spectrum.sum()


def test_realize_tdl_is_seeded():
    profile = ChannelProfile.named("tdl-c", speed_kmh=30)
    a = realize_tdl(profile, 100, NUM, seed=9)
    b = realize_tdl(profile, 100, NUM, seed=9)
    assert np.array_equal(a.taps, b.taps)
    assert a.taps.shape[1] == 100


def test_realize_tdl_rejects_awgn():
    with pytest.raises(ConfigurationError):
        realize_tdl(ChannelProfile(), 10, NUM, seed=1)


def test_static_two_tap_channel_equals_frequency_response():
    grid = _random_grid(NR_AL1, 6)
    samples = ofdm_modulate(grid, NUM, 3)
    realization = _static_two_tap(samples.size)
    rx = ofdm_demodulate(apply_channel(samples, realization), NUM, ResourceGrid.empty(NR_AL1))
    bins = NUM.subcarrier_bins(NR_AL1.subcarriers)
    response = realization.frequency_response(np.zeros(1, dtype=np.int64), bins, NUM.fft_size)
    assert np.allclose(rx.cells[:, :3], response * grid.cells[:, :3], atol=1e-6)


def test_identity_channel_passes_samples_through():
    samples = np.random.default_rng(7).standard_normal(300) + 0j
    out = apply_channel(samples, ChannelRealization.identity(300))
    assert np.array_equal(out, samples)


def test_apply_channel_rejects_short_realization():
    with pytest.raises(ConfigurationError):
        apply_channel(np.ones(10, dtype=complex), ChannelRealization.identity(5))


# Pilot sampling limits


def test_max_delay_spread_for_four_subcarrier_spacing():
    assert max_delay_spread(4) == pytest.approx(8.33e-6, rel=1e-3)


def test_max_pilot_symbol_gap():
    assert max_pilot_symbol_gap(0.0) == math.inf
    assert max_pilot_symbol_gap(77.8) == pytest.approx(15000 / (2 * 77.8))
