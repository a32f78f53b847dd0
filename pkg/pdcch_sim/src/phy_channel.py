"""CP-OFDM and the propagation models: AWGN and tapped delay lines with Jakes Doppler.

The transforms are unitary (``ifft * sqrt(N)``), so one unit of noise variance per time sample
shows up as one unit per resource element after demodulation.
"""

import csv
import math
from dataclasses import dataclass, replace
from enum import Enum
from functools import cached_property
from pathlib import Path

import numpy as np
import numpy.typing as npt

from ..utils.bits import SymbolBlock
from ..utils.constants import (
    DEFAULT_CARRIER_FREQ_HZ,
    SUBCARRIER_SPACING_HZ,
    TDL_A_DELAY_SPREAD_S,
    TDL_C_DELAY_SPREAD_S,
    fft_size_for,
    max_doppler_hz,
)
from ..utils.errors import ConfigurationError, FormatError
from ..utils.tables import TDL_A_PDP, TDL_C_PDP
from .resource_map import CoresetConfig, CyclicPrefix, ResourceGrid

SINUSOIDS_PER_TAP = 32
NOISE_STREAM = 1
# CP lengths are defined in units of a 2048-point FFT
REFERENCE_FFT = 2048
NORMAL_CP_LONG = 160
NORMAL_CP_SHORT = 144
EXTENDED_CP = 512


@dataclass(frozen=True)
class Numerology:
    fft_size: int = 512
    cyclic_prefix: CyclicPrefix = CyclicPrefix.NORMAL
    subcarrier_spacing: float = SUBCARRIER_SPACING_HZ

    def __post_init__(self):
        if self.fft_size % 128:
            raise ConfigurationError(f"FFT size {self.fft_size} is not a multiple of 128")

    @classmethod
    def for_coreset(cls, cfg: CoresetConfig) -> "Numerology":
        return cls(fft_size_for(cfg.subcarriers), cfg.cyclic_prefix)

    @property
    def symbol_duration(self) -> float:
        """Useful symbol length T_s = 1/Δf."""
        return 1.0 / self.subcarrier_spacing

    @property
    def sample_rate(self) -> float:
        return self.fft_size * self.subcarrier_spacing

    @property
    def symbols_per_slot(self) -> int:
        return self.cyclic_prefix.symbols_per_slot

    @cached_property
    def cp_lengths(self) -> tuple[int, ...]:
        if self.cyclic_prefix is CyclicPrefix.EXTENDED:
            return (EXTENDED_CP * self.fft_size // REFERENCE_FFT,) * self.symbols_per_slot
        half = self.symbols_per_slot // 2
        long_cp = NORMAL_CP_LONG * self.fft_size // REFERENCE_FFT
        short_cp = NORMAL_CP_SHORT * self.fft_size // REFERENCE_FFT
        return tuple(
            long_cp if sym % half == 0 else short_cp for sym in range(self.symbols_per_slot)
        )

    def body_starts(self, symbols: int) -> npt.NDArray[np.int64]:
        """Sample index where the useful part of each symbol begins."""
        cps = np.asarray(self.cp_lengths[:symbols])
        period = cps + self.fft_size
        return np.cumsum(period) - self.fft_size

    def samples_for(self, symbols: int) -> int:
        return int(sum(self.cp_lengths[:symbols]) + symbols * self.fft_size)

    def subcarrier_bins(self, subcarriers: int) -> npt.NDArray[np.int64]:
        """FFT bin of each grid subcarrier; the occupied band is centred on DC."""
        if subcarriers > self.fft_size:
            raise ConfigurationError(f"{subcarriers} subcarriers exceed FFT size {self.fft_size}")
        return (np.arange(subcarriers) - subcarriers // 2) % self.fft_size


class ChannelModel(str, Enum):
    AWGN = "awgn"
    TDL_A = "tdl-a"
    TDL_C = "tdl-c"


NOMINAL_DELAY_SPREAD_S = {
    ChannelModel.AWGN: 0.0,
    ChannelModel.TDL_A: TDL_A_DELAY_SPREAD_S,
    ChannelModel.TDL_C: TDL_C_DELAY_SPREAD_S,
}


@dataclass(frozen=True)
class ChannelProfile:
    model: ChannelModel = ChannelModel.AWGN
    delay_spread: float = 0.0
    speed_kmh: float = 0.0
    carrier_freq: float = DEFAULT_CARRIER_FREQ_HZ
    pdp: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        if self.speed_kmh < 0 or self.carrier_freq <= 0 or self.delay_spread < 0:
            raise ConfigurationError(
                "speed and delay spread must be non-negative and the carrier positive",
            )

    @classmethod
    def named(
        cls,
        name: str,
        delay_spread: float | None = None,
        speed_kmh: float = 0.0,
        carrier_freq: float = DEFAULT_CARRIER_FREQ_HZ,
    ) -> "ChannelProfile":
        try:
            model = ChannelModel(name.lower())
        except ValueError:
            choices = ", ".join(m.value for m in ChannelModel)
            raise ConfigurationError(f"unknown channel model {name!r}; use {choices}") from None
        pdp = {ChannelModel.TDL_A: TDL_A_PDP, ChannelModel.TDL_C: TDL_C_PDP}.get(model, ())
        spread = NOMINAL_DELAY_SPREAD_S[model] if delay_spread is None else delay_spread
        return cls(model, spread, speed_kmh, carrier_freq, tuple(pdp))

    def with_pdp_csv(self, path: str | Path) -> "ChannelProfile":
        """Replace the profile with absolute (delay_ns, power_db) rows from a CSV file."""
        rows = load_pdp_csv(path)
        max_delay = max(delay for delay, _ in rows)
        spread = self.delay_spread or max_delay or 1.0
        pdp = tuple((delay / spread, power) for delay, power in rows)
        model = ChannelModel.TDL_A if self.model is ChannelModel.AWGN else self.model
        return replace(self, model=model, delay_spread=spread, pdp=pdp)

    @property
    def max_doppler(self) -> float:
        return max_doppler_hz(self.speed_kmh, self.carrier_freq)

    def tap_delays(self) -> npt.NDArray[np.float64]:
        return np.array([d for d, _ in self.pdp]) * self.delay_spread

    def tap_powers(self) -> npt.NDArray[np.float64]:
        """Linear tap powers normalized to unit sum."""
        powers = 10.0 ** (np.array([p for _, p in self.pdp]) / 10.0)
        return powers / powers.sum()


def load_pdp_csv(path: str | Path) -> list[tuple[float, float]]:
    """Rows of a ``delay_ns,power_db`` CSV as (delay in seconds, power dB)."""
    try:
        with open(path, newline="") as handle:
            reader = csv.DictReader(handle)
            rows = [(float(r["delay_ns"]) * 1e-9, float(r["power_db"])) for r in reader]
    except FileNotFoundError:
        raise ConfigurationError(f"PDP file {path} not found") from None
    except (KeyError, TypeError, ValueError) as e:
        raise FormatError(f"PDP file {path} needs numeric delay_ns,power_db columns: {e}") from e
    if not rows:
        raise FormatError(f"PDP file {path} has no taps")
    if any(delay < 0 for delay, _ in rows):
        raise FormatError(f"PDP file {path} has negative delays")
    return rows


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    taps: npt.NDArray[np.complex128]  # (delay bins, samples)
    delays: npt.NDArray[np.int64]  # in samples
    noise_var: float = 0.0
    seed: int = 0

    @classmethod
    def identity(cls, samples: int, noise_var: float = 0.0, seed: int = 0) -> "ChannelRealization":
        taps = np.ones((1, samples), dtype=np.complex128)
        return cls(taps, np.zeros(1, dtype=np.int64), noise_var, seed)

    @property
    def samples(self) -> int:
        return self.taps.shape[1]

    def frequency_response(
        self,
        at: npt.NDArray[np.int64],
        bins: npt.NDArray[np.int64],
        fft_size: int,
    ) -> npt.NDArray[np.complex128]:
        """H[k, i] from the tap snapshot at sample ``at[i]`` for FFT bin ``bins[k]``."""
        phase = np.exp(-2j * np.pi * np.outer(bins, self.delays) / fft_size)
        return phase @ self.taps[:, at]


def noise_variance(signal_power: float, cnr_db: float) -> float:
    if math.isinf(cnr_db) and cnr_db > 0:
        return 0.0
    return signal_power / 10.0 ** (cnr_db / 10.0)


def _complex_noise(rng: np.random.Generator, size: int, var: float) -> SymbolBlock:
    return np.sqrt(var / 2) * (rng.standard_normal(size) + 1j * rng.standard_normal(size))


def ofdm_modulate(grid: ResourceGrid, num: Numerology, symbols: int | None = None) -> SymbolBlock:
    """Modulate the first ``symbols`` OFDM symbols of the slot (all by default)."""
    if grid.cyclic_prefix is not num.cyclic_prefix or grid.symbols != num.symbols_per_slot:
        raise ConfigurationError(
            f"grid has {grid.symbols} symbols with {grid.cyclic_prefix.value} CP, numerology "
            f"expects {num.symbols_per_slot} with {num.cyclic_prefix.value} CP",
        )
    symbols = grid.symbols if symbols is None else symbols
    bins = num.subcarrier_bins(grid.subcarriers)
    freq = np.zeros((symbols, num.fft_size), dtype=np.complex128)
    freq[:, bins] = grid.cells[:, :symbols].T
    body = np.fft.ifft(freq, axis=1) * np.sqrt(num.fft_size)
    return np.concatenate(
        [np.concatenate([b[-cp:], b]) for b, cp in zip(body, num.cp_lengths, strict=False)],
    )


def ofdm_demodulate(samples: SymbolBlock, num: Numerology, template: ResourceGrid) -> ResourceGrid:
    """Strip CPs and transform back; symbols that were not transmitted stay zero."""
    samples = np.asarray(samples, dtype=np.complex128).ravel()
    lengths = [num.samples_for(s) for s in range(num.symbols_per_slot + 1)]
    if samples.size not in lengths:
        raise FormatError(f"{samples.size} samples do not cover a whole number of OFDM symbols")
    symbols = lengths.index(samples.size)
    starts = num.body_starts(symbols)
    body = samples[starts[:, None] + np.arange(num.fft_size)]
    freq = np.fft.fft(body, axis=1) / np.sqrt(num.fft_size)
    cells = np.zeros_like(template.cells)
    cells[:, :symbols] = freq[:, num.subcarrier_bins(template.subcarriers)].T
    return template.with_cells(cells)


def apply_awgn(
    samples: SymbolBlock,
    cnr_db: float,
    seed: int | np.random.Generator | None,
    signal_power: float = 1.0,
) -> SymbolBlock:
    samples = np.asarray(samples, dtype=np.complex128)
    var = noise_variance(signal_power, cnr_db)
    if var == 0.0:
        return samples.copy()
    rng = np.random.default_rng(seed)
    return samples + _complex_noise(rng, samples.size, var).reshape(samples.shape)


def _merged_taps(profile: ChannelProfile, num: Numerology):
    delays = np.rint(profile.tap_delays() * num.sample_rate).astype(np.int64)
    bins, inverse = np.unique(delays, return_inverse=True)
    powers = np.zeros(bins.size)
    np.add.at(powers, inverse, profile.tap_powers())
    return bins, powers


def realize_tdl(
    profile: ChannelProfile,
    samples: int,
    num: Numerology,
    seed: int,
    noise_var: float = 0.0,
) -> ChannelRealization:
    """Sum-of-sinusoids Rayleigh process per delay bin, sampled at the OFDM rate.

    Taps rounding to the same sample are merged into one process of the summed power.
    """
    if profile.model is ChannelModel.AWGN or not profile.pdp:
        raise ConfigurationError("AWGN profiles have no fading taps to realize")
    delays, powers = _merged_taps(profile, num)
    rng = np.random.default_rng(seed)
    shape = (delays.size, SINUSOIDS_PER_TAP)
    arrival = rng.uniform(0.0, 2 * np.pi, shape)
    phase = rng.uniform(0.0, 2 * np.pi, shape)
    doppler = 2 * np.pi * profile.max_doppler * np.cos(arrival)
    t = np.arange(samples) / num.sample_rate
    oscillators = np.exp(1j * (doppler[:, :, None] * t + phase[:, :, None]))
    taps = oscillators.sum(axis=1) * np.sqrt(powers / SINUSOIDS_PER_TAP)[:, None]
    return ChannelRealization(taps, delays, noise_var, seed)


def apply_channel(samples: SymbolBlock, realization: ChannelRealization) -> SymbolBlock:
    """Time-varying tapped-delay-line convolution followed by AWGN at the realization's σ²."""
    samples = np.asarray(samples, dtype=np.complex128).ravel()
    if realization.samples < samples.size:
        raise ConfigurationError(
            f"channel realization covers {realization.samples} samples, got {samples.size}",
        )
    out = np.zeros_like(samples)
    for tap, delay in zip(realization.taps, realization.delays, strict=True):
        out[delay:] += tap[delay : samples.size] * samples[: samples.size - delay]
    if realization.noise_var > 0:
        rng = np.random.default_rng([realization.seed, NOISE_STREAM])
        out += _complex_noise(rng, samples.size, realization.noise_var)
    return out


def max_delay_spread(pilot_spacing: int, num: Numerology | None = None) -> float:
    """Largest delay spread a pilot every ``pilot_spacing`` subcarriers can resolve."""
    num = num or Numerology()
    return num.symbol_duration / (2 * pilot_spacing)


def max_pilot_symbol_gap(max_doppler: float, num: Numerology | None = None) -> float:
    """Largest pilot spacing in OFDM symbols that samples the Doppler spectrum."""
    num = num or Numerology()
    if max_doppler <= 0:
        return math.inf
    return 1.0 / (2 * num.symbol_duration * max_doppler)
