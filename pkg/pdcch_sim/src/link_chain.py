"""Transmit side of the PDCCH link: one DCI from payload bits to time-domain samples.

``build_chain`` resolves a ``ChainConfig`` into every per-module configuration once, so a
Monte-Carlo worker reuses the same polar construction, interleaver tables and grid roles for
all of its trials.
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from ..utils.bits import BitBlock, SymbolBlock
from ..utils.constants import (
    C_RNTI,
    DEFAULT_BANDWIDTH_MHZ,
    DEFAULT_DCI_BITS,
    DEFAULT_LIST_SIZE,
    DEFAULT_WAVA_ITERATIONS,
    LTE_1C_RESERVED_BITS,
    M_RNTI,
)
from ..utils.errors import ConfigurationError
from .dci_codec import CrcConfig, Standard, build_dci, content_length, crc_attach, crc_config_for
from .fec import PolarConfig, TbccConfig, polar_construct, polar_encode, tbcc_encode
from .phy_channel import ChannelProfile, Numerology, ofdm_modulate
from .rate_match import lte_rate_match, nr_rate_match
from .resource_map import (
    CoresetConfig,
    DmrsAccounting,
    ResourceGrid,
    map_to_grid,
    qpsk_map,
    scramble,
    scrambling_seed,
)

# control symbols per slot when a scenario does not say
DEFAULT_CONTROL_SYMBOLS = {Standard.LTE: 2, Standard.NR: 3}


class EstimationMode(str, Enum):
    IDEAL = "ideal"
    PILOT_2D = "pilot_2d"


@dataclass(frozen=True)
class ChainConfig:
    standard: Standard
    aggregation_level: int
    dci_bits: int = DEFAULT_DCI_BITS
    bandwidth_mhz: float = DEFAULT_BANDWIDTH_MHZ
    coreset_symbols: int | None = None
    dmrs_accounting: DmrsAccounting = DmrsAccounting.FORMULA
    channel: ChannelProfile = field(default_factory=ChannelProfile)
    estimation: EstimationMode = EstimationMode.IDEAL
    rnti_masking: bool = False
    list_size: int = DEFAULT_LIST_SIZE
    wava_iterations: int = DEFAULT_WAVA_ITERATIONS

    @property
    def control_symbols(self) -> int:
        if self.coreset_symbols is None:
            return DEFAULT_CONTROL_SYMBOLS[self.standard]
        return self.coreset_symbols


@dataclass(frozen=True, eq=False)
class LinkChain:
    config: ChainConfig
    coreset: CoresetConfig
    numerology: Numerology
    crc: CrcConfig
    content_bits: int
    polar: PolarConfig | None = None
    tbcc: TbccConfig | None = None

    @property
    def standard(self) -> Standard:
        return self.config.standard

    @property
    def rm_len(self) -> int:
        return self.coreset.rm_len

    @property
    def info_len(self) -> int:
        """Payload plus CRC: the channel-code input length K."""
        return self.payload_len + self.crc.length

    @property
    def payload_len(self) -> int:
        if self.standard is Standard.LTE:
            return self.content_bits + LTE_1C_RESERVED_BITS[self.config.bandwidth_mhz]
        return self.content_bits

    @property
    def mother_len(self) -> int:
        if self.polar is not None:
            return self.polar.block_len
        return 3 * self.info_len

    @property
    def scrambling_seed(self) -> int:
        return scrambling_seed(self.standard)

    @property
    def tx_samples(self) -> int:
        return self.numerology.samples_for(self.coreset.coreset_symbols)

    def empty_grid(self) -> ResourceGrid:
        return ResourceGrid.empty(self.coreset)


@dataclass(frozen=True, eq=False)
class TxBlock:
    payload: BitBlock
    coded: BitBlock
    grid: ResourceGrid
    samples: SymbolBlock


def build_chain(cfg: ChainConfig) -> LinkChain:
    coreset = CoresetConfig(
        cfg.standard,
        cfg.aggregation_level,
        cfg.bandwidth_mhz,
        cfg.control_symbols,
        cfg.dmrs_accounting,
    )
    numerology = Numerology.for_coreset(coreset)
    fmt = cfg.standard.dci_format
    content = content_length(fmt, cfg.bandwidth_mhz)
    if cfg.standard is Standard.LTE:
        payload = content + LTE_1C_RESERVED_BITS[cfg.bandwidth_mhz]
        if payload != cfg.dci_bits:
            raise ConfigurationError(
                f"DCI 1C is {payload} bits at {cfg.bandwidth_mhz} MHz, not {cfg.dci_bits}",
            )
        crc = crc_config_for(fmt, M_RNTI if cfg.rnti_masking else None)
        tbcc = TbccConfig(wava_iterations=cfg.wava_iterations)
        return LinkChain(cfg, coreset, numerology, crc, content, tbcc=tbcc)
    if cfg.dci_bits < content:
        raise ConfigurationError(f"DCI 1_0 needs at least {content} bits, got {cfg.dci_bits}")
    crc = crc_config_for(fmt, C_RNTI if cfg.rnti_masking else None)
    polar = polar_construct(cfg.dci_bits + crc.length, coreset.rm_len, cfg.list_size)
    return LinkChain(cfg, coreset, numerology, crc, cfg.dci_bits, polar=polar)


def encode_block(chain: LinkChain, payload: BitBlock) -> BitBlock:
    """CRC attach, channel coding and rate matching to E bits."""
    word = crc_attach(payload, chain.crc)
    if chain.polar is not None:
        return nr_rate_match(polar_encode(word, chain.polar), chain.rm_len, chain.polar)
    return lte_rate_match(tbcc_encode(word, chain.tbcc), chain.rm_len)


def transmit(chain: LinkChain, rng: np.random.Generator) -> TxBlock:
    cfg = chain.config
    content = rng.integers(0, 2, chain.content_bits, dtype=np.uint8)
    msg = build_dci(cfg.standard.dci_format, cfg.bandwidth_mhz, content, chain.crc.rnti_mask or 0)
    coded = encode_block(chain, msg.payload_bits)
    symbols = qpsk_map(scramble(coded, chain.scrambling_seed))
    grid = map_to_grid(symbols, chain.coreset)
    samples = ofdm_modulate(grid, chain.numerology, chain.coreset.coreset_symbols)
    return TxBlock(msg.payload_bits, coded, grid, samples)
