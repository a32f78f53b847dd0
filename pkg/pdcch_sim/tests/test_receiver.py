import numpy as np
import pytest

from pdcch_sim.src.dci_codec import Standard
from pdcch_sim.src.link_chain import (
    ChainConfig,
    EstimationMode,
    LinkChain,
    build_chain,
    transmit,
)
from pdcch_sim.src.phy_channel import (
    ChannelProfile,
    ChannelRealization,
    Numerology,
    apply_channel,
    ofdm_demodulate,
    realize_tdl,
)
from pdcch_sim.src.receiver import (
    ChannelEstimate,
    DmrsPattern,
    descramble_llr,
    estimate_ideal,
    estimate_pilot_2d,
    mmse_equalize,
    receive_and_decode,
    soft_bits,
)
from pdcch_sim.src.resource_map import (
    CoresetConfig,
    DmrsAccounting,
    ResourceGrid,
    control_positions,
    gold_sequence,
    qpsk_map,
)
from pdcch_sim.utils.errors import ConfigurationError

NR_AL1 = CoresetConfig(Standard.NR, 1)
NUM = Numerology.for_coreset(NR_AL1)


def _flat_estimate(h: np.ndarray) -> ChannelEstimate:
    return ChannelEstimate(h, np.zeros(h.size), EstimationMode.IDEAL)


def _received_grid(realization: ChannelRealization, seed: int) -> tuple[ResourceGrid, LinkChain]:
    chain = build_chain(ChainConfig(Standard.NR, 1, estimation=EstimationMode.PILOT_2D))
    tx = transmit(chain, np.random.default_rng(seed))
    rx = apply_channel(tx.samples, realization)
    return ofdm_demodulate(rx, chain.numerology, chain.empty_grid()), chain


# Estimation


def test_ideal_estimate_of_static_channel_is_its_response():
    samples = NUM.samples_for(3)
    taps = np.array([[0.9 + 0.1j], [0.2 - 0.3j]]) * np.ones((2, samples))
    realization = ChannelRealization(taps, np.array([0, 3]))
    est = estimate_ideal(realization, NR_AL1, NUM)
    subcarrier, _ = control_positions(NR_AL1)
    phase = np.exp(-2j * np.pi * NUM.subcarrier_bins(NR_AL1.subcarriers)[subcarrier] * 3 / 512)
    expected = 0.9 + 0.1j + (0.2 - 0.3j) * phase
    assert np.allclose(est.h_hat, expected, atol=1e-9)
    assert not est.error_var.any()


def test_pilot_estimate_of_flat_noiseless_channel_is_exact():
    samples = NUM.samples_for(3)
    taps = np.full((1, samples), 0.6 - 0.8j)
    realization = ChannelRealization(taps, np.zeros(1, dtype=np.int64))
    grid, chain = _received_grid(realization, 1)
    est = estimate_pilot_2d(grid, chain.coreset, 1e-9)
    assert np.allclose(est.h_hat, 0.6 - 0.8j, atol=1e-9)
    assert est.mode is EstimationMode.PILOT_2D


def test_pilot_estimate_tracks_tdl_a_without_noise():
    profile = ChannelProfile.named("tdl-a", speed_kmh=3)
    realization = realize_tdl(profile, NUM.samples_for(3), NUM, seed=11)
    grid, chain = _received_grid(realization, 2)
    est = estimate_pilot_2d(grid, chain.coreset, 1e-9)
    truth = estimate_ideal(realization, chain.coreset, chain.numerology).h_hat
    rms = np.sqrt(np.mean(np.abs(est.h_hat - truth) ** 2) / np.mean(np.abs(truth) ** 2))
    assert rms < 0.01


def test_pilot_estimate_error_variance_scales_with_noise():
    samples = NUM.samples_for(3)
    realization = ChannelRealization.identity(samples)
    grid, chain = _received_grid(realization, 3)
    low = estimate_pilot_2d(grid, chain.coreset, 0.01).error_var
    high = estimate_pilot_2d(grid, chain.coreset, 0.1).error_var
    assert np.allclose(high, 10 * low)
    assert np.all(low > 0)


def test_pilot_estimate_needs_pilots():
    lte = CoresetConfig(Standard.LTE, 1, coreset_symbols=2)
    with pytest.raises(ConfigurationError):
        estimate_pilot_2d(ResourceGrid.empty(lte), lte, 0.1)


# Pilot feasibility


def test_dmrs_pattern_for_coreset():
    assert DmrsPattern.for_coreset(NR_AL1).freq_spacing == 8
    geometry = CoresetConfig(Standard.NR, 1, dmrs_accounting=DmrsAccounting.GEOMETRY)
    pattern = DmrsPattern.for_coreset(geometry)
    assert pattern.freq_spacing == 4
    assert pattern.time_positions == (0, 1, 2)
    assert pattern.symbol_gap == 1


@pytest.mark.parametrize("name", ["tdl-a", "tdl-c"])
def test_shipped_profiles_are_feasible(name):
    DmrsPattern(freq_spacing=4).check_feasible(ChannelProfile.named(name, speed_kmh=120))


def test_long_delay_spread_is_infeasible():
    profile = ChannelProfile.named("tdl-a", delay_spread=1e-6)
    with pytest.raises(ConfigurationError, match="8.33 µs"):
        DmrsPattern(freq_spacing=4).check_feasible(profile)


def test_sparse_pilots_in_time_are_infeasible_at_high_doppler():
    profile = ChannelProfile.named("tdl-a", speed_kmh=500, carrier_freq=30e9)
    with pytest.raises(ConfigurationError, match="Doppler"):
        DmrsPattern(time_positions=(0, 13)).check_feasible(profile)


# Equalization


def test_mmse_no_noise_recovers_symbols():
    rng = np.random.default_rng(4)
    bits = rng.integers(0, 2, 20000, dtype=np.uint8)
    x = qpsk_map(bits)
    h = rng.standard_normal(x.size) + 1j * rng.standard_normal(x.size)
    x_hat, _ = mmse_equalize(h * x, _flat_estimate(h), 0.0)
    assert np.allclose(x_hat, x)
    llr = soft_bits(h * x, _flat_estimate(h), 0.0)
    assert np.array_equal((llr < 0).astype(np.uint8), bits)


def test_mmse_limits():
    rng = np.random.default_rng(5)
    h = rng.standard_normal(50) + 1j * rng.standard_normal(50)
    y = rng.standard_normal(50) + 1j * rng.standard_normal(50)
    zf, _ = mmse_equalize(y, _flat_estimate(h), 1e-12)
    assert np.allclose(zf, y / h, rtol=1e-6)
    mf, _ = mmse_equalize(y, _flat_estimate(h), 1e6)
    assert np.allclose(mf, np.conj(h) * y / 1e6, rtol=1e-4)


def test_mmse_post_variance_and_faded_res():
    h = np.array([2.0 + 0j, 0j])
    est = ChannelEstimate(h, np.array([0.1, 0.1]), EstimationMode.PILOT_2D)
    x_hat, post_var = mmse_equalize(np.array([1.0 + 0j, 1.0 + 0j]), est, 0.3)
    assert post_var[0] == pytest.approx((0.3 + 0.1) / 4.0)
    assert post_var[1] == np.inf
    assert x_hat[1] == 0
    llr = soft_bits(np.array([1.0 + 0j, 1.0 + 0j]), est, 0.3)
    assert llr[2:].tolist() == [0.0, 0.0]


def test_descramble_llr_flips_signs_where_gold_is_one():
    llr = np.ones(64)
    out = descramble_llr(llr, 77)
    assert np.array_equal(out < 0, gold_sequence(77, 64).astype(bool))


# Full receive path


@pytest.mark.parametrize("standard", list(Standard))
def test_receive_noiseless_awgn(standard):
    chain = build_chain(ChainConfig(standard, 2))
    tx = transmit(chain, np.random.default_rng(6))
    realization = ChannelRealization.identity(tx.samples.size)
    outcome = receive_and_decode(tx.samples, chain, realization, tx)
    assert outcome.crc_pass
    assert outcome.bit_errors == 0
    assert outcome.coded_bit_errors == 0
    assert np.array_equal(outcome.payload, tx.payload)


def test_receive_pilot_estimation_noiseless_static_channel():
    chain = build_chain(ChainConfig(Standard.NR, 1, estimation=EstimationMode.PILOT_2D))
    tx = transmit(chain, np.random.default_rng(7))
    taps = np.full((1, tx.samples.size), 0.5 + 0.5j)
    realization = ChannelRealization(taps, np.zeros(1, dtype=np.int64))
    outcome = receive_and_decode(apply_channel(tx.samples, realization), chain, realization, tx)
    assert outcome.crc_pass
    assert outcome.bit_errors == 0


def test_receive_pure_noise_fails_crc():
    chain = build_chain(ChainConfig(Standard.NR, 1))
    tx = transmit(chain, np.random.default_rng(8))
    realization = ChannelRealization.identity(tx.samples.size, noise_var=1e4, seed=3)
    outcome = receive_and_decode(apply_channel(tx.samples, realization), chain, realization, tx)
    assert not outcome.crc_pass
