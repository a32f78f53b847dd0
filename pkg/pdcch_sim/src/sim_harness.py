"""Monte-Carlo CNR sweeps with deterministic per-trial seeding.

Trials run in fixed-size batches. Batches may execute on any worker in any order, but they
are folded into the point counters strictly in trial order and the stop rule is checked at
batch boundaries, so a fixed master seed yields the same counters for any worker count.
"""

import csv
import math
from collections.abc import Callable
from dataclasses import dataclass, field
from multiprocessing.pool import Pool
from pathlib import Path

import numpy as np
from scipy.stats import norm

from ..utils.constants import (
    DEFAULT_MASTER_SEED,
    DEFAULT_MAX_BLOCKS,
    DEFAULT_MIN_BLOCK_ERRORS,
    SCENARIO_CSV_HEADER,
)
from ..utils.errors import ConfigurationError, FormatError, RangeError
from .dci_codec import Standard
from .link_chain import ChainConfig, EstimationMode, LinkChain, build_chain, transmit
from .phy_channel import (
    ChannelModel,
    ChannelRealization,
    apply_channel,
    noise_variance,
    realize_tdl,
)
from .receiver import DmrsPattern, receive_and_decode

BATCH_SIZE = 256
CONFIDENCE = 0.95

ProgressCallback = Callable[[float, int, int], None]


@dataclass(frozen=True)
class SimConfig:
    chain: ChainConfig
    cnr_grid: tuple[float, ...]
    min_block_errors: int = DEFAULT_MIN_BLOCK_ERRORS
    max_blocks: int = DEFAULT_MAX_BLOCKS
    master_seed: int = DEFAULT_MASTER_SEED
    noiseless: bool = False
    name: str = ""

    def __post_init__(self):
        if not self.cnr_grid:
            raise ConfigurationError("CNR grid is empty")
        if any(b <= a for a, b in zip(self.cnr_grid, self.cnr_grid[1:], strict=False)):
            raise ConfigurationError(f"CNR grid must be strictly increasing: {self.cnr_grid}")
        if self.min_block_errors < 1 or self.max_blocks < self.min_block_errors:
            raise ConfigurationError(
                f"stop rule needs 1 <= min_block_errors ({self.min_block_errors}) "
                f"<= max_blocks ({self.max_blocks})",
            )
        if not 0 <= self.master_seed < 2**64:
            raise ConfigurationError(f"master seed {self.master_seed} is not a u64")


@dataclass(frozen=True)
class PointStats:
    cnr_db: float
    blocks: int = 0
    block_errors: int = 0
    bits: int = 0
    bit_errors: int = 0

    def __add__(self, other: "PointStats") -> "PointStats":
        return PointStats(
            self.cnr_db,
            self.blocks + other.blocks,
            self.block_errors + other.block_errors,
            self.bits + other.bits,
            self.bit_errors + other.bit_errors,
        )

    @property
    def bler(self) -> float:
        return self.block_errors / self.blocks if self.blocks else 0.0

    @property
    def ber(self) -> float:
        return self.bit_errors / self.bits if self.bits else 0.0

    @property
    def bler_interval(self) -> tuple[float, float]:
        return wilson_interval(self.block_errors, self.blocks)


@dataclass(frozen=True)
class SimResult:
    points: tuple[PointStats, ...] = field(default_factory=tuple)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def cnr_db(self) -> list[float]:
        return [p.cnr_db for p in self.points]

    @property
    def bler_curve(self) -> list[float]:
        return [p.bler for p in self.points]


def wilson_interval(
    successes: int,
    trials: int,
    confidence: float = CONFIDENCE,
) -> tuple[float, float]:
    if trials == 0:
        return 0.0, 1.0
    z = float(norm.ppf(0.5 + confidence / 2))
    p = successes / trials
    z2n = z * z / trials
    center = (p + z2n / 2) / (1 + z2n)
    half = z * math.sqrt(p * (1 - p) / trials + z2n / (4 * trials)) / (1 + z2n)
    return max(0.0, center - half), min(1.0, center + half)


def check_config(cfg: SimConfig) -> LinkChain:
    """Build the chain and run every feasibility check a sweep depends on."""
    chain = build_chain(cfg.chain)
    if cfg.chain.estimation is EstimationMode.PILOT_2D:
        if cfg.chain.standard is Standard.LTE:
            raise ConfigurationError("pilot-based estimation needs the NR DMRS; LTE has none")
        DmrsPattern.for_coreset(chain.coreset).check_feasible(cfg.chain.channel, chain.numerology)
    return chain


def trial_rng(master_seed: int, cnr_index: int, trial_index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([master_seed, cnr_index, trial_index]))


def run_trial(
    chain: LinkChain,
    cnr_db: float,
    rng: np.random.Generator,
    noiseless: bool = False,
) -> PointStats:
    """One DCI through the link; returns single-block counters."""
    tx = transmit(chain, rng)
    noise_var = 0.0 if noiseless else noise_variance(tx.grid.occupied_power(), cnr_db)
    seed = int(rng.integers(2**62))
    profile = chain.config.channel
    if profile.model is ChannelModel.AWGN:
        realization = ChannelRealization.identity(tx.samples.size, noise_var, seed)
    else:
        realization = realize_tdl(profile, tx.samples.size, chain.numerology, seed, noise_var)
    outcome = receive_and_decode(apply_channel(tx.samples, realization), chain, realization, tx)
    return PointStats(
        cnr_db,
        blocks=1,
        block_errors=int(not outcome.crc_pass),
        bits=int(tx.payload.size),
        bit_errors=outcome.bit_errors,
    )


def run_batch(
    chain: LinkChain,
    cfg: SimConfig,
    cnr_index: int,
    start: int,
    count: int,
) -> PointStats:
    cnr_db = cfg.cnr_grid[cnr_index]
    stats = PointStats(cnr_db)
    for trial in range(start, start + count):
        rng = trial_rng(cfg.master_seed, cnr_index, trial)
        stats = stats + run_trial(chain, cnr_db, rng, cfg.noiseless)
    return stats


_worker: tuple[LinkChain, SimConfig] | None = None


def _init_worker(cfg: SimConfig) -> None:
    global _worker
    _worker = (build_chain(cfg.chain), cfg)


def _pooled_batch(job: tuple[int, int, int]) -> PointStats:
    assert _worker is not None
    return run_batch(*_worker, *job)


def _batches(max_blocks: int) -> list[tuple[int, int]]:
    return [(s, min(BATCH_SIZE, max_blocks - s)) for s in range(0, max_blocks, BATCH_SIZE)]


def _stop(stats: PointStats, cfg: SimConfig) -> bool:
    return stats.block_errors >= cfg.min_block_errors or stats.blocks >= cfg.max_blocks


def run_point(
    cfg: SimConfig,
    cnr_index: int,
    workers: int = 1,
    progress: ProgressCallback | None = None,
    pool: Pool | None = None,
) -> PointStats:
    """Run one CNR point of the grid until the stop rule fires."""
    chain = check_config(cfg)
    cnr_db = cfg.cnr_grid[cnr_index]
    stats = PointStats(cnr_db)
    pending = _batches(cfg.max_blocks)
    while pending and not _stop(stats, cfg):
        wave, pending = pending[: max(workers, 1)], pending[max(workers, 1) :]
        if pool is None:
            # stop early inside a wave when running in-process
            results = []
            for start, count in wave:
                results.append(run_batch(chain, cfg, cnr_index, start, count))
                if _stop(stats + sum(results, PointStats(cnr_db)), cfg):
                    break
        else:
            results = pool.map(_pooled_batch, [(cnr_index, s, c) for s, c in wave])
        for batch in results:
            stats = stats + batch
            if progress is not None:
                progress(cnr_db, stats.blocks, stats.block_errors)
            if _stop(stats, cfg):
                break
    return stats


def run_sweep(
    cfg: SimConfig,
    workers: int = 1,
    progress: ProgressCallback | None = None,
) -> SimResult:
    check_config(cfg)
    indices = range(len(cfg.cnr_grid))
    if workers <= 1:
        return SimResult(tuple(run_point(cfg, i, 1, progress) for i in indices))
    with Pool(workers, initializer=_init_worker, initargs=(cfg,)) as pool:
        return SimResult(tuple(run_point(cfg, i, workers, progress, pool) for i in indices))


def interpolate_threshold(result: SimResult, target_bler: float) -> float:
    """CNR where BLER crosses ``target_bler``, log-linear between the bracketing points."""
    if not 0 < target_bler < 1:
        raise RangeError(f"target BLER {target_bler} must lie in (0, 1)")
    points = sorted((p for p in result.points if p.bler > 0), key=lambda p: p.cnr_db)
    for p in points:
        if math.isclose(p.bler, target_bler):
            return p.cnr_db
    log_target = math.log10(target_bler)
    for lo, hi in zip(points, points[1:], strict=False):
        if lo.bler > target_bler > hi.bler or lo.bler < target_bler < hi.bler:
            a, b = math.log10(lo.bler), math.log10(hi.bler)
            return lo.cnr_db + (log_target - a) * (hi.cnr_db - lo.cnr_db) / (b - a)
    measured = ", ".join(f"{p.cnr_db:g} dB: {p.bler:.3g}" for p in result.points)
    above = [p for p in points if p.bler > target_bler]
    if above:
        clean = [p for p in result.points if p.block_errors == 0 and p.cnr_db > above[-1].cnr_db]
        if clean:
            quiet = min(clean, key=lambda p: p.cnr_db)
            raise RangeError(
                f"target BLER {target_bler:g} falls between {above[-1].cnr_db:g} dB "
                f"(BLER {above[-1].bler:.3g}) and {quiet.cnr_db:g} dB, where no block errors "
                f"were seen in {quiet.blocks} blocks; raise max_blocks or add CNR points "
                f"between them [{measured}]",
            )
    raise RangeError(f"target BLER {target_bler:g} is not bracketed by [{measured}]")


def _fmt(value: float) -> str:
    return format(value, ".10g")


def write_result_csv(result: SimResult, path: str | Path) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(SCENARIO_CSV_HEADER)
        for p in result.points:
            lo, hi = p.bler_interval
            writer.writerow(
                [
                    _fmt(p.cnr_db),
                    p.blocks,
                    p.block_errors,
                    p.bits,
                    p.bit_errors,
                    _fmt(p.bler),
                    _fmt(p.ber),
                    _fmt(lo),
                    _fmt(hi),
                ],
            )


def read_result_csv(path: str | Path) -> SimResult:
    """Counters are read back; derived columns are recomputed from them."""
    try:
        with open(path, newline="") as handle:
            reader = csv.reader(handle)
            header = next(reader, None)
            rows = list(reader)
    except FileNotFoundError:
        raise ConfigurationError(f"result file {path} not found") from None
    if header is None or tuple(header) != SCENARIO_CSV_HEADER:
        raise FormatError(f"{path} does not start with {','.join(SCENARIO_CSV_HEADER)}")
    try:
        points = tuple(
            PointStats(float(r[0]), int(r[1]), int(r[2]), int(r[3]), int(r[4])) for r in rows if r
        )
    except (IndexError, ValueError) as e:
        raise FormatError(f"malformed row in {path}: {e}") from e
    return SimResult(points)
