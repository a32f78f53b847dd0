"""Array aliases for bit and soft-value blocks and their golden-file text form."""

import numpy as np
import numpy.typing as npt

from .errors import FormatError

BitBlock = npt.NDArray[np.uint8]
LlrBlock = npt.NDArray[np.float64]
SymbolBlock = npt.NDArray[np.complex128]


def as_bits(bits: object) -> BitBlock:
    """Coerce any 0/1 sequence to a flat ``uint8`` array, rejecting other values."""
    arr = np.asarray(bits).astype(np.uint8).ravel()
    if arr.size and arr.max() > 1:
        raise FormatError("bit sequences may only contain 0 and 1")
    return arr


def bits_to_text(bits: BitBlock) -> str:
    """MSB-first ``'0'/'1'`` rendering used in golden-vector files."""
    return "".join("1" if b else "0" for b in bits)


def text_to_bits(text: str) -> BitBlock:
    text = text.strip()
    if any(c not in "01" for c in text):
        raise FormatError(f"not a bit string: {text!r}")
    return np.frombuffer(text.encode("ascii"), dtype=np.uint8) - ord("0")


def bits_to_int(bits: BitBlock) -> int:
    value = 0
    for b in bits:
        value = (value << 1) | int(b)
    return value


def int_to_bits(value: int, width: int) -> BitBlock:
    return np.array([(value >> (width - 1 - i)) & 1 for i in range(width)], dtype=np.uint8)
