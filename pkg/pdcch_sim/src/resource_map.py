"""Scrambling, QPSK, CORESET geometry and the resource grid the OFDM layer consumes.

REGs of a control region are numbered time first (REG r sits in symbol ``r % symbols`` and
frequency slot ``r // symbols``) and CCE j owns a contiguous run of REGs, i.e. non-interleaved
mapping. Symbols are placed REG by REG, in frequency order inside each REG, skipping pilots.
"""

import csv
import math
from dataclasses import dataclass
from enum import Enum, IntEnum
from fractions import Fraction
from functools import cache
from pathlib import Path

import numpy as np
import numpy.typing as npt

from ..utils.bits import BitBlock, LlrBlock, SymbolBlock, as_bits
from ..utils.constants import (
    AGGREGATION_LEVELS,
    LTE_CELL_ID,
    LTE_RB_TABLE,
    NR_DMRS_SCRAMBLING_ID,
    NR_DMRS_SLOT,
    NR_RB_TABLE,
    NR_SCRAMBLING_ID,
    SUBCARRIERS_PER_RB,
    SYMBOLS_PER_SLOT_EXTENDED_CP,
    SYMBOLS_PER_SLOT_NORMAL_CP,
)
from ..utils.errors import ConfigurationError, FormatError
from .dci_codec import Standard, crc_config_for

GOLD_OFFSET = 1600
GOLD_REGISTER = 31
SEED_MODULUS = 2**31
MAX_CONTROL_SYMBOLS = 3
NR_DMRS_PER_RB = 9


class CyclicPrefix(str, Enum):
    NORMAL = "normal"
    EXTENDED = "extended"

    @property
    def symbols_per_slot(self) -> int:
        if self is CyclicPrefix.NORMAL:
            return SYMBOLS_PER_SLOT_NORMAL_CP
        return SYMBOLS_PER_SLOT_EXTENDED_CP


class DmrsAccounting(str, Enum):
    # formula: 9 pilots per CCE (every 8th subcarrier), E = 126·AL
    # geometry: 3 pilots per REG (every 4th subcarrier), E = 108·AL
    FORMULA = "formula"
    GEOMETRY = "geometry"


class ReRole(IntEnum):
    UNUSED = 0
    CONTROL = 1
    DMRS = 2


@dataclass(frozen=True)
class CoresetConfig:
    standard: Standard
    aggregation_level: int
    bandwidth_mhz: float = 5.0
    coreset_symbols: int = 3
    dmrs_accounting: DmrsAccounting = DmrsAccounting.FORMULA

    def __post_init__(self):
        if self.aggregation_level not in AGGREGATION_LEVELS:
            raise ConfigurationError(
                f"aggregation level {self.aggregation_level} not in {AGGREGATION_LEVELS}",
            )
        if not 1 <= self.coreset_symbols <= MAX_CONTROL_SYMBOLS:
            raise ConfigurationError(
                f"control region spans 1-{MAX_CONTROL_SYMBOLS} symbols, "
                f"got {self.coreset_symbols}",
            )
        rb_table = LTE_RB_TABLE if self.standard is Standard.LTE else NR_RB_TABLE
        if self.bandwidth_mhz not in rb_table:
            raise ConfigurationError(
                f"{self.standard.value.upper()} has no {self.bandwidth_mhz} MHz carrier; "
                f"choose one of {sorted(rb_table)}",
            )
        if self.rb_count > self.carrier_rbs:
            raise ConfigurationError(
                f"AL{self.aggregation_level} needs {self.rb_count} > {self.carrier_rbs} RBs "
                f"available at {self.bandwidth_mhz} MHz",
            )
        formula_dmrs = self.dmrs_accounting is DmrsAccounting.FORMULA
        if self.standard is Standard.NR and formula_dmrs and self.rb_count % 2:
            raise ConfigurationError(
                f"formula DMRS accounting needs an even RB count per symbol, got {self.rb_count}",
            )

    @property
    def regs_per_cce(self) -> int:
        return 9 if self.standard is Standard.LTE else 6

    @property
    def res_per_reg(self) -> int:
        return 4 if self.standard is Standard.LTE else SUBCARRIERS_PER_RB

    @property
    def dmrs_per_rb(self) -> int:
        return 0 if self.standard is Standard.LTE else NR_DMRS_PER_RB

    @property
    def regs(self) -> int:
        return self.aggregation_level * self.regs_per_cce

    @property
    def total_res(self) -> int:
        return self.regs * self.res_per_reg

    @property
    def rb_count(self) -> int:
        """RBs spanned by the control region in each of its symbols."""
        return math.ceil(self.total_res / (SUBCARRIERS_PER_RB * self.coreset_symbols))

    @property
    def carrier_rbs(self) -> int:
        rb_table = LTE_RB_TABLE if self.standard is Standard.LTE else NR_RB_TABLE
        return rb_table[self.bandwidth_mhz]

    @property
    def subcarriers(self) -> int:
        return self.carrier_rbs * SUBCARRIERS_PER_RB

    @property
    def cyclic_prefix(self) -> CyclicPrefix:
        return CyclicPrefix.EXTENDED if self.standard is Standard.LTE else CyclicPrefix.NORMAL

    @property
    def dmrs_res(self) -> int:
        return int(np.count_nonzero(_role_table(self) == ReRole.DMRS))

    @property
    def control_res(self) -> int:
        return self.total_res - self.dmrs_res

    @property
    def rm_len(self) -> int:
        """Rate-matched length E: two coded bits per control RE."""
        return 2 * self.control_res


def _is_pilot_subcarrier(cfg: CoresetConfig, subcarrier: npt.NDArray[np.int64]):
    if cfg.standard is Standard.LTE:
        return np.zeros(subcarrier.shape, dtype=bool)
    spacing = 8 if cfg.dmrs_accounting is DmrsAccounting.FORMULA else 4
    return subcarrier % spacing == 1


@cache
def _re_positions(cfg: CoresetConfig) -> tuple[npt.NDArray[np.int64], npt.NDArray[np.int64]]:
    """(subcarrier, symbol) of every CORESET RE in placement order."""
    reg = np.repeat(np.arange(cfg.regs), cfg.res_per_reg)
    within = np.tile(np.arange(cfg.res_per_reg), cfg.regs)
    symbol = reg % cfg.coreset_symbols
    subcarrier = (reg // cfg.coreset_symbols) * cfg.res_per_reg + within
    return subcarrier, symbol


@cache
def _role_table(cfg: CoresetConfig) -> npt.NDArray[np.uint8]:
    roles = np.full(
        (cfg.subcarriers, cfg.cyclic_prefix.symbols_per_slot),
        ReRole.UNUSED,
        dtype=np.uint8,
    )
    subcarrier, symbol = _re_positions(cfg)
    pilot = _is_pilot_subcarrier(cfg, subcarrier)
    roles[subcarrier, symbol] = np.where(pilot, ReRole.DMRS, ReRole.CONTROL)
    roles.setflags(write=False)
    return roles


@cache
def control_positions(cfg: CoresetConfig) -> tuple[npt.NDArray[np.int64], npt.NDArray[np.int64]]:
    subcarrier, symbol = _re_positions(cfg)
    keep = ~_is_pilot_subcarrier(cfg, subcarrier)
    return subcarrier[keep], symbol[keep]


def dmrs_positions(cfg: CoresetConfig) -> tuple[npt.NDArray[np.int64], npt.NDArray[np.int64]]:
    """Pilot REs ordered by symbol, then subcarrier."""
    symbol, subcarrier = np.nonzero(_role_table(cfg).T == ReRole.DMRS)
    return subcarrier, symbol


@dataclass(eq=False)
class ResourceGrid:
    cells: SymbolBlock
    roles: npt.NDArray[np.uint8]
    cyclic_prefix: CyclicPrefix = CyclicPrefix.NORMAL

    @classmethod
    def empty(cls, cfg: CoresetConfig) -> "ResourceGrid":
        roles = _role_table(cfg)
        return cls(np.zeros(roles.shape, dtype=np.complex128), roles, cfg.cyclic_prefix)

    @property
    def subcarriers(self) -> int:
        return self.cells.shape[0]

    @property
    def symbols(self) -> int:
        return self.cells.shape[1]

    def occupied_power(self) -> float:
        """Mean power over control and pilot REs."""
        occupied = self.roles != ReRole.UNUSED
        if not occupied.any():
            return 0.0
        return float(np.mean(np.abs(self.cells[occupied]) ** 2))

    def total_power(self) -> float:
        return float(np.sum(np.abs(self.cells) ** 2))

    def with_cells(self, cells: SymbolBlock) -> "ResourceGrid":
        if cells.shape != self.cells.shape:
            raise FormatError(f"grid shape {cells.shape} differs from {self.cells.shape}")
        return ResourceGrid(cells, self.roles, self.cyclic_prefix)


@dataclass(frozen=True)
class CodeRateReport:
    dci_bits: int
    crc_bits: int
    available_bits: int
    effective_cr: Fraction

    @property
    def usable_bits(self) -> int:
        return int(self.dci_bits / self.effective_cr)


@cache
def gold_sequence(seed: int, length: int) -> BitBlock:
    """Length-31 Gold sequence c(n) with the 1600-chip fast-forward."""
    if not 0 <= seed < SEED_MODULUS:
        raise ConfigurationError(f"Gold seed {seed} is not a 31-bit value")
    total = length + GOLD_OFFSET
    x1 = np.zeros(total + GOLD_REGISTER, dtype=np.uint8)
    x2 = np.zeros(total + GOLD_REGISTER, dtype=np.uint8)
    x1[0] = 1
    x2[:GOLD_REGISTER] = (seed >> np.arange(GOLD_REGISTER)) & 1
    # the feedback taps reach at most 3 ahead, so 28 outputs can be produced per step
    step = GOLD_REGISTER - 3
    for n in range(0, total, step):
        m = min(step, total - n)
        o = n + GOLD_REGISTER
        x1[o : o + m] = x1[n + 3 : n + 3 + m] ^ x1[n : n + m]
        x2[o : o + m] = (
            x2[n + 3 : n + 3 + m] ^ x2[n + 2 : n + 2 + m] ^ x2[n + 1 : n + 1 + m] ^ x2[n : n + m]
        )
    seq = x1[GOLD_OFFSET:total] ^ x2[GOLD_OFFSET:total]
    seq.setflags(write=False)
    return seq


def scrambling_seed(standard: Standard, rnti: int = 0) -> int:
    if standard is Standard.LTE:
        # subframe 0 of the cell
        return LTE_CELL_ID
    return (rnti * 2**16 + NR_SCRAMBLING_ID) % SEED_MODULUS


def dmrs_seed(symbol: int, slot: int = NR_DMRS_SLOT, n_id: int = NR_DMRS_SCRAMBLING_ID) -> int:
    return (2**17 * (14 * slot + symbol + 1) * (2 * n_id + 1) + 2 * n_id) % SEED_MODULUS


def scramble(bits: object, seed: int) -> BitBlock:
    arr = as_bits(bits)
    return arr ^ gold_sequence(seed, arr.size)


def qpsk_map(bits: object) -> SymbolBlock:
    arr = as_bits(bits)
    if arr.size % 2:
        raise FormatError(f"QPSK needs an even number of bits, got {arr.size}")
    signs = 1.0 - 2.0 * arr.astype(np.float64)
    return (signs[0::2] + 1j * signs[1::2]) / np.sqrt(2)


def qpsk_demap(symbols: SymbolBlock, noise_var: float | npt.NDArray[np.float64]) -> LlrBlock:
    symbols = np.asarray(symbols, dtype=np.complex128).ravel()
    var = np.broadcast_to(np.asarray(noise_var, dtype=np.float64), symbols.shape)
    if np.any(var <= 0) or np.any(np.isnan(var)):
        raise ConfigurationError("noise variance must be positive")
    scale = 2 * np.sqrt(2) / var
    llr = np.empty(2 * symbols.size)
    llr[0::2] = scale * symbols.real
    llr[1::2] = scale * symbols.imag
    return llr


def dmrs_pilots(cfg: CoresetConfig) -> SymbolBlock:
    """Unit-modulus QPSK pilots in ``dmrs_positions`` order; one Gold seed per symbol."""
    _, symbol = dmrs_positions(cfg)
    pilots = np.empty(symbol.size, dtype=np.complex128)
    for sym in np.unique(symbol):
        at = symbol == sym
        count = int(np.count_nonzero(at))
        pilots[at] = qpsk_map(gold_sequence(dmrs_seed(int(sym)), 2 * count))
    return pilots


def multiplex(*blocks: SymbolBlock) -> SymbolBlock:
    """PDCCHs of several UEs share the region by concatenation; the chain uses one."""
    return np.concatenate([np.asarray(b, dtype=np.complex128).ravel() for b in blocks])


def map_to_grid(symbols: SymbolBlock, cfg: CoresetConfig) -> ResourceGrid:
    symbols = np.asarray(symbols, dtype=np.complex128).ravel()
    if symbols.size != cfg.control_res:
        raise FormatError(
            f"{symbols.size} symbols for {cfg.control_res} control REs "
            f"(AL{cfg.aggregation_level} {cfg.standard.value.upper()})",
        )
    grid = ResourceGrid.empty(cfg)
    grid.cells[control_positions(cfg)] = symbols
    if cfg.dmrs_res:
        grid.cells[dmrs_positions(cfg)] = dmrs_pilots(cfg)
    return grid


def demap_from_grid(grid: ResourceGrid, cfg: CoresetConfig) -> SymbolBlock:
    if not np.array_equal(grid.roles, _role_table(cfg)):
        raise FormatError("grid roles do not match the CORESET configuration")
    return grid.cells[control_positions(cfg)].copy()


def code_rate_report(dci_bits: int, cfg: CoresetConfig) -> CodeRateReport:
    coded = 2 * cfg.total_res
    crc_bits = crc_config_for(cfg.standard.dci_format).length
    if cfg.standard is Standard.LTE:
        return CodeRateReport(dci_bits, crc_bits, coded, Fraction(dci_bits, coded))
    rbs = cfg.aggregation_level
    if cfg.dmrs_accounting is DmrsAccounting.GEOMETRY:
        rbs *= 2
    usable = coded - 2 * cfg.dmrs_per_rb * rbs
    return CodeRateReport(dci_bits, crc_bits, cfg.rm_len, Fraction(dci_bits, usable))


def dump_grid_csv(grid: ResourceGrid, path: str | Path) -> int:
    """Write the occupied REs; returns the number of rows."""
    subcarrier, symbol = np.nonzero(grid.roles != ReRole.UNUSED)
    order = np.lexsort((subcarrier, symbol))
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["symbol_index", "subcarrier", "role", "re_value_real", "re_value_imag"])
        for sc, sym in zip(subcarrier[order], symbol[order], strict=True):
            value = complex(grid.cells[sc, sym])
            role = ReRole(int(grid.roles[sc, sym])).name.lower()
            writer.writerow([int(sym), int(sc), role, repr(value.real), repr(value.imag)])
    return int(order.size)
