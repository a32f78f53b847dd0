"""Channel estimation, MMSE equalization and the decode path back to DCI bits.

Estimates are carried per control RE, in the order ``resource_map.control_positions`` places
symbols, so they line up with ``demap_from_grid`` output element by element.
"""

from dataclasses import dataclass

import numpy as np
import numpy.typing as npt
from scipy.interpolate import interp1d

from ..utils.bits import BitBlock, LlrBlock, SymbolBlock
from ..utils.constants import SUBCARRIERS_PER_RB
from ..utils.errors import ConfigurationError
from .dci_codec import crc_check
from .fec import polar_decode, tbcc_decode
from .link_chain import EstimationMode, LinkChain, TxBlock
from .phy_channel import (
    ChannelProfile,
    ChannelRealization,
    Numerology,
    max_delay_spread,
    max_pilot_symbol_gap,
    ofdm_demodulate,
)
from .rate_match import rate_recover
from .resource_map import (
    CoresetConfig,
    DmrsAccounting,
    ResourceGrid,
    control_positions,
    demap_from_grid,
    dmrs_pilots,
    dmrs_positions,
    gold_sequence,
    qpsk_demap,
)

# stands in for σ² when the link is noiseless, keeping LLRs finite
NOISELESS_VAR_FLOOR = 1e-9


@dataclass(frozen=True, eq=False)
class ChannelEstimate:
    h_hat: SymbolBlock
    error_var: npt.NDArray[np.float64]
    mode: EstimationMode


@dataclass(frozen=True)
class DmrsPattern:
    freq_spacing: int = 4
    freq_offset: int = 1
    time_positions: tuple[int, ...] = (0,)

    @classmethod
    def for_coreset(cls, cfg: CoresetConfig) -> "DmrsPattern":
        spacing = 8 if cfg.dmrs_accounting is DmrsAccounting.FORMULA else 4
        return cls(spacing, 1, tuple(range(cfg.coreset_symbols)))

    @property
    def symbol_gap(self) -> int:
        if len(self.time_positions) < 2:
            return 1
        return int(np.max(np.diff(self.time_positions)))

    def check_feasible(self, profile: ChannelProfile, num: Numerology | None = None) -> None:
        """Pilot spacing must sample the channel's delay and Doppler spread."""
        num = num or Numerology()
        tau_max = float(profile.tap_delays().max()) if profile.pdp else 0.0
        tau_limit = max_delay_spread(self.freq_spacing, num)
        if tau_max > tau_limit:
            raise ConfigurationError(
                f"delay spread {tau_max * 1e6:.2f} µs exceeds {tau_limit * 1e6:.2f} µs "
                f"resolvable with pilots every {self.freq_spacing} subcarriers",
            )
        gap_limit = max_pilot_symbol_gap(profile.max_doppler, num)
        if self.symbol_gap > gap_limit:
            raise ConfigurationError(
                f"pilot gap of {self.symbol_gap} symbols exceeds {gap_limit:.1f} "
                f"for {profile.max_doppler:.1f} Hz Doppler",
            )


@dataclass(frozen=True, eq=False)
class DecodeOutcome:
    payload: BitBlock
    crc_pass: bool
    bit_errors: int
    coded_bit_errors: int


def estimate_ideal(
    realization: ChannelRealization,
    cfg: CoresetConfig,
    num: Numerology,
) -> ChannelEstimate:
    """True response: DFT of the tap snapshot at each OFDM symbol midpoint."""
    subcarrier, symbol = control_positions(cfg)
    mid = num.body_starts(cfg.coreset_symbols) + num.fft_size // 2
    bins = num.subcarrier_bins(cfg.subcarriers)
    response = realization.frequency_response(mid, bins, num.fft_size)
    h_hat = response[subcarrier, symbol]
    return ChannelEstimate(h_hat, np.zeros(h_hat.size), EstimationMode.IDEAL)


def _interpolation_weights(known: npt.NDArray[np.int64], wanted: npt.NDArray[np.int64]):
    """Rows of linear interpolation/extrapolation weights from ``known`` onto ``wanted``."""
    if known.size == 1:
        return np.ones((wanted.size, 1))
    basis = interp1d(known, np.eye(known.size), axis=0, fill_value="extrapolate")
    return basis(wanted)


def estimate_pilot_2d(
    grid: ResourceGrid,
    cfg: CoresetConfig,
    noise_var: float,
    pattern: DmrsPattern | None = None,
) -> ChannelEstimate:
    """LS at the pilots, linear in frequency per pilot symbol, then linear in time."""
    pattern = pattern or DmrsPattern.for_coreset(cfg)
    pilot_sc, pilot_sym = dmrs_positions(cfg)
    if pilot_sc.size == 0:
        raise ConfigurationError(
            f"{cfg.standard.value.upper()} control region carries no pilots to estimate from",
        )
    ls = grid.cells[pilot_sc, pilot_sym] / dmrs_pilots(cfg)
    band = np.arange(cfg.rb_count * SUBCARRIERS_PER_RB)
    symbols = np.arange(cfg.coreset_symbols)
    times = np.intersect1d(pattern.time_positions, pilot_sym)
    if times.size == 0:
        raise ConfigurationError(f"no pilots in symbols {pattern.time_positions}")

    per_symbol = np.empty((times.size, band.size), dtype=np.complex128)
    freq_gain = np.empty((times.size, band.size))
    for i, sym in enumerate(times):
        at = pilot_sym == sym
        w = _interpolation_weights(pilot_sc[at], band)
        per_symbol[i] = w @ ls[at]
        freq_gain[i] = np.sum(w**2, axis=1)

    wt = _interpolation_weights(times, symbols)
    h_grid = wt @ per_symbol
    var_grid = noise_var * (wt**2) @ freq_gain

    subcarrier, symbol = control_positions(cfg)
    return ChannelEstimate(
        h_grid[symbol, subcarrier],
        var_grid[symbol, subcarrier],
        EstimationMode.PILOT_2D,
    )


def mmse_equalize(
    y: SymbolBlock,
    est: ChannelEstimate,
    noise_var: float,
) -> tuple[SymbolBlock, npt.NDArray[np.float64]]:
    """x̂ = conj(ĥ)·y/(|ĥ|²+σ²) and the unbiased post-equalization noise variance.

    Faded-out REs (ĥ = 0) come back as x̂ = 0 with infinite variance.
    """
    h = est.h_hat
    power = np.abs(h) ** 2
    denom = power + noise_var
    x_hat = np.divide(np.conj(h) * y, denom, out=np.zeros_like(h), where=denom > 0)
    post_var = np.full(h.shape, np.inf)
    np.divide(noise_var + est.error_var, power, out=post_var, where=power > 0)
    return x_hat, post_var


def soft_bits(y: SymbolBlock, est: ChannelEstimate, noise_var: float) -> LlrBlock:
    """Equalize, remove the MMSE bias μ = |ĥ|²/(|ĥ|²+σ²) and demap to LLRs."""
    x_hat, post_var = mmse_equalize(y, est, noise_var)
    power = np.abs(est.h_hat) ** 2
    bias = np.divide(power, power + noise_var, out=np.zeros_like(power), where=power > 0)
    unbiased = np.divide(x_hat, bias, out=np.zeros_like(x_hat), where=bias > 0)
    return qpsk_demap(unbiased, np.maximum(post_var, NOISELESS_VAR_FLOOR))


def descramble_llr(llr: LlrBlock, seed: int) -> LlrBlock:
    flips = gold_sequence(seed, llr.size)
    return llr * (1.0 - 2.0 * flips)


def receive_and_decode(
    samples: SymbolBlock,
    chain: LinkChain,
    realization: ChannelRealization,
    reference: TxBlock | None = None,
) -> DecodeOutcome:
    grid = ofdm_demodulate(samples, chain.numerology, chain.empty_grid())
    noise_var = realization.noise_var
    if chain.config.estimation is EstimationMode.IDEAL:
        est = estimate_ideal(realization, chain.coreset, chain.numerology)
    else:
        est = estimate_pilot_2d(grid, chain.coreset, max(noise_var, NOISELESS_VAR_FLOOR))
    llr = soft_bits(demap_from_grid(grid, chain.coreset), est, noise_var)
    llr = descramble_llr(llr, chain.scrambling_seed)
    mother = rate_recover(llr, chain.standard, chain.mother_len, chain.polar)

    if chain.polar is not None:
        result = polar_decode(mother, chain.polar, chain.crc)
        word, crc_pass = result.info_bits, result.crc_pass
    else:
        word = tbcc_decode(mother, chain.tbcc)
        crc_pass = crc_check(word, chain.crc)
    payload = word[: -chain.crc.length]

    bit_errors = coded_errors = 0
    if reference is not None:
        bit_errors = int(np.count_nonzero(payload != reference.payload))
        hard = (llr < 0).astype(np.uint8)
        coded_errors = int(np.count_nonzero(hard != reference.coded))
    return DecodeOutcome(payload, crc_pass, bit_errors, coded_errors)
