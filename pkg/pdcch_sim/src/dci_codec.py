"""DCI payload construction and CRC attachment/verification with RNTI masking.

LTE uses format 1C with M-RNTI (8 notification bits plus bandwidth-dependent reserved bits)
and a 16-bit CRC. NR uses format 1_0 treated as an opaque payload of at least 12 bits and the
24-bit CRC24C, computed over 24 prepended ones that are not transmitted.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from ..utils.bits import BitBlock, as_bits, int_to_bits
from ..utils.constants import (
    LTE_1C_NOTIFICATION_BITS,
    LTE_1C_RESERVED_BITS,
    NR_1_0_MIN_BITS,
    NR_RB_TABLE,
)
from ..utils.errors import ConfigurationError, FormatError

RNTI_BITS = 16


class Standard(str, Enum):
    LTE = "lte"
    NR = "nr"

    @property
    def dci_format(self) -> "DciFormat":
        return DciFormat.LTE_1C if self is Standard.LTE else DciFormat.NR_1_0


class DciFormat(str, Enum):
    LTE_1C = "lte_1c"
    NR_1_0 = "nr_1_0"


class CrcPolynomial(Enum):
    # (length, generator without the leading x^L term)
    CRC16_LTE = (16, 0x1021)
    CRC24C_NR = (24, 0xB2B117)

    @property
    def length(self) -> int:
        return self.value[0]

    @property
    def generator(self) -> int:
        return self.value[1]


@dataclass(frozen=True, eq=False)
class DciMessage:
    format: DciFormat
    payload_bits: BitBlock
    rnti: int
    bandwidth_mhz: float

    def __len__(self) -> int:
        return int(self.payload_bits.size)


@dataclass(frozen=True)
class CrcConfig:
    polynomial: CrcPolynomial
    rnti_mask: int | None = None
    ones_prepend: bool = False

    @property
    def length(self) -> int:
        return self.polynomial.length

    def __post_init__(self):
        if self.rnti_mask is not None and not 0 <= self.rnti_mask < 2**RNTI_BITS:
            raise ConfigurationError(f"RNTI mask {self.rnti_mask:#x} is not a 16-bit value")


def content_length(fmt: DciFormat, bandwidth_mhz: float) -> int:
    """Number of content bits the caller supplies for a format (reserved bits excluded)."""
    if fmt is DciFormat.LTE_1C:
        if bandwidth_mhz not in LTE_1C_RESERVED_BITS:
            raise ConfigurationError(f"LTE has no {bandwidth_mhz} MHz channel bandwidth")
        return LTE_1C_NOTIFICATION_BITS
    if bandwidth_mhz not in NR_RB_TABLE:
        raise ConfigurationError(f"NR at 15 kHz has no {bandwidth_mhz} MHz channel bandwidth")
    return NR_1_0_MIN_BITS


def build_dci(
    fmt: DciFormat,
    bandwidth_mhz: float,
    content_bits: object,
    rnti: int = 0,
) -> DciMessage:
    """Assemble the payload in field order; reserved bits are zero."""
    content = as_bits(content_bits)
    if fmt is DciFormat.LTE_1C:
        expected = content_length(fmt, bandwidth_mhz)
        if content.size != expected:
            raise FormatError(
                f"DCI 1C carries {expected} notification bits, got {content.size}",
            )
        reserved = np.zeros(LTE_1C_RESERVED_BITS[bandwidth_mhz], dtype=np.uint8)
        payload = np.concatenate([content, reserved])
    else:
        content_length(fmt, bandwidth_mhz)
        if content.size < NR_1_0_MIN_BITS:
            raise FormatError(
                f"DCI 1_0 needs at least {NR_1_0_MIN_BITS} bits, got {content.size}",
            )
        payload = content.copy()
    return DciMessage(format=fmt, payload_bits=payload, rnti=rnti, bandwidth_mhz=bandwidth_mhz)


def crc_remainder(bits: BitBlock, polynomial: CrcPolynomial) -> int:
    """Remainder of bits(D)·D^L modulo g(D), MSB first, zero initial register."""
    length = polynomial.length
    top = 1 << (length - 1)
    mask = (1 << length) - 1
    reg = 0
    for b in bits:
        feedback = bool(reg & top) ^ bool(b)
        reg = (reg << 1) & mask
        if feedback:
            reg ^= polynomial.generator
    return reg


def _parity(msg: BitBlock, cfg: CrcConfig) -> BitBlock:
    if cfg.ones_prepend:
        msg = np.concatenate([np.ones(cfg.length, dtype=np.uint8), msg])
    parity = crc_remainder(msg, cfg.polynomial)
    if cfg.rnti_mask is not None:
        # the mask covers the last 16 parity bits
        parity ^= cfg.rnti_mask
    return int_to_bits(parity, cfg.length)


def crc_attach(msg: object, cfg: CrcConfig) -> BitBlock:
    bits = as_bits(msg)
    if bits.size == 0:
        raise FormatError("cannot attach a CRC to an empty message")
    return np.concatenate([bits, _parity(bits, cfg)])


def crc_check(codeword: object, cfg: CrcConfig) -> bool:
    bits = as_bits(codeword)
    if bits.size <= cfg.length:
        raise FormatError(
            f"codeword of {bits.size} bits cannot hold a {cfg.length}-bit CRC and a payload",
        )
    payload, received = bits[: -cfg.length], bits[-cfg.length :]
    return bool(np.array_equal(_parity(payload, cfg), received))


def crc_config_for(fmt: DciFormat, rnti: int | None = None) -> CrcConfig:
    """Standard CRC setup per format; ``rnti=None`` disables masking."""
    if fmt is DciFormat.LTE_1C:
        return CrcConfig(CrcPolynomial.CRC16_LTE, rnti_mask=rnti)
    return CrcConfig(CrcPolynomial.CRC24C_NR, rnti_mask=rnti, ones_prepend=True)
