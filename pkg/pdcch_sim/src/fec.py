"""Channel coding for both control chains.

LTE: rate-1/3 tail-biting convolutional code (constraint length 7, generators 133/171/165
octal), decoded with a wrap-around Viterbi search over the circular trellis.

NR: polar code of length N = 2^n (32 ≤ N ≤ 512) with the universal reliability order,
decoded by CRC-aided successive-cancellation list decoding.

LLR convention throughout: ``llr = log(P(0) / P(1))``, positive favours bit 0.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cache

import numpy as np
import numpy.typing as npt

from ..utils.bits import BitBlock, LlrBlock, as_bits
from ..utils.constants import DEFAULT_LIST_SIZE, DEFAULT_WAVA_ITERATIONS, MAX_RATE_MATCH_LEN
from ..utils.errors import ConfigurationError, FormatError, UnsupportedError
from ..utils.tables import NR_SUBBLOCK_PATTERN, POLAR_RELIABILITY_1024
from .dci_codec import CrcConfig, crc_check

# ---------------------------------------------------------------------------------------------
# Tail-biting convolutional code
# ---------------------------------------------------------------------------------------------


@dataclass(frozen=True)
class TbccConfig:
    constraint_length: int = 7
    generators: tuple[int, ...] = (0o133, 0o171, 0o165)
    wava_iterations: int = DEFAULT_WAVA_ITERATIONS

    def __post_init__(self):
        if self.wava_iterations < 1:
            raise ConfigurationError("wrap-around Viterbi needs at least one iteration")
        if any(g >> self.constraint_length for g in self.generators):
            raise ConfigurationError("generator polynomial longer than the constraint length")

    @property
    def memory(self) -> int:
        return self.constraint_length - 1

    @property
    def num_states(self) -> int:
        return 1 << self.memory

    @property
    def mother_rate(self) -> Fraction:
        return Fraction(1, len(self.generators))


def _parity_bits(words: npt.NDArray[np.int64]) -> npt.NDArray[np.uint8]:
    out = np.zeros(words.shape, dtype=np.uint8)
    w = words.copy()
    while np.any(w):
        out ^= (w & 1).astype(np.uint8)
        w >>= 1
    return out


@dataclass(frozen=True, eq=False)
class _Trellis:
    # predecessor[s, b]: the state that reaches s when the oldest register bit was b
    predecessor: npt.NDArray[np.int64]
    # signs[s, b, i]: +1/-1 expected on output stream i along that transition
    signs: npt.NDArray[np.float64]


@cache
def _trellis(cfg: TbccConfig) -> _Trellis:
    m = cfg.memory
    states = np.arange(cfg.num_states)
    newest = states >> (m - 1)
    predecessor = np.stack([((states << 1) & (cfg.num_states - 1)) | b for b in (0, 1)], axis=1)
    register = (newest[:, None] << m) | predecessor
    signs = np.stack(
        [1.0 - 2.0 * _parity_bits(register & g) for g in cfg.generators],
        axis=-1,
    )
    return _Trellis(predecessor=predecessor, signs=signs)


def tbcc_encode(info: object, cfg: TbccConfig | None = None) -> BitBlock:
    """Encode with the register preloaded by the last ``memory`` info bits.

    Output streams are interleaved per input bit: ``out[3k + i]`` is stream ``i`` at step ``k``.
    """
    cfg = cfg or TbccConfig()
    bits = as_bits(info)
    if bits.size < cfg.memory:
        raise FormatError(
            f"tail-biting needs at least {cfg.memory} info bits, got {bits.size}",
        )
    streams = []
    for g in cfg.generators:
        acc = np.zeros(bits.size, dtype=np.uint8)
        for delay in range(cfg.constraint_length):
            if (g >> (cfg.memory - delay)) & 1:
                acc ^= np.roll(bits, delay)
        streams.append(acc)
    return np.stack(streams, axis=1).reshape(-1)


def _viterbi_pass(
    branch: npt.NDArray[np.float64],
    start_metrics: npt.NDArray[np.float64],
    trellis: _Trellis,
) -> tuple[npt.NDArray[np.float64], npt.NDArray[np.uint8]]:
    metrics = start_metrics
    decisions = np.empty((branch.shape[0], metrics.size), dtype=np.uint8)
    for k, bm in enumerate(branch):
        candidates = metrics[trellis.predecessor] + bm
        decisions[k] = np.argmax(candidates, axis=1)
        metrics = candidates.max(axis=1)
    return metrics, decisions


def _traceback(
    decisions: npt.NDArray[np.uint8],
    trellis: _Trellis,
    memory: int,
) -> tuple[npt.NDArray[np.uint8], npt.NDArray[np.int64]]:
    """Trace every end state back at once; returns (bits[k, end_state], start_state)."""
    num_states = decisions.shape[1]
    state = np.arange(num_states)
    bits = np.empty(decisions.shape, dtype=np.uint8)
    for k in range(decisions.shape[0] - 1, -1, -1):
        bits[k] = state >> (memory - 1)
        state = trellis.predecessor[state, decisions[k, state]]
    return bits, state


def _best_survivor(llr: LlrBlock, cfg: TbccConfig) -> tuple[BitBlock, int, int]:
    """Wrap-around Viterbi search; returns (bits, start_state, end_state) of the winner."""
    llr = np.asarray(llr, dtype=np.float64).ravel()
    rate = len(cfg.generators)
    if llr.size % rate:
        raise FormatError(f"LLR block of {llr.size} values is not a multiple of {rate}")
    info_len = llr.size // rate
    if info_len < cfg.memory:
        raise FormatError(f"tail-biting needs at least {cfg.memory} info bits")

    trellis = _trellis(cfg)
    received = llr.reshape(info_len, rate)
    branch = 0.5 * np.einsum("sbi,ki->ksb", trellis.signs, received)

    start = np.zeros(cfg.num_states)
    best: tuple[BitBlock, int, int] | None = None
    best_score = -math.inf
    bits = np.zeros((info_len, cfg.num_states), dtype=np.uint8)
    origin = np.arange(cfg.num_states)
    end = np.zeros(cfg.num_states)
    for _ in range(cfg.wava_iterations):
        end, decisions = _viterbi_pass(branch, start, trellis)
        bits, origin = _traceback(decisions, trellis, cfg.memory)
        closed = np.flatnonzero(origin == np.arange(cfg.num_states))
        if closed.size:
            # metric gained on this lap only, comparable across laps
            gain = end[closed] - start[closed]
            pick = int(np.argmax(gain))
            if gain[pick] > best_score:
                best_score = float(gain[pick])
                state = int(closed[pick])
                best = (bits[:, state].copy(), state, state)
        start = end
    if best is None:
        state = int(np.argmax(end))
        best = (bits[:, state].copy(), int(origin[state]), state)
    return best


def tbcc_decode(llr: LlrBlock, cfg: TbccConfig | None = None) -> BitBlock:
    """Wrap-around Viterbi: iterate around the circle, keep the best closed survivor."""
    bits, _, _ = _best_survivor(llr, cfg or TbccConfig())
    return bits


# ---------------------------------------------------------------------------------------------
# Polar code
# ---------------------------------------------------------------------------------------------

POLAR_MIN_EXPONENT = 5
POLAR_MAX_EXPONENT = 9
POLAR_MIN_RATE = Fraction(1, 8)


@dataclass(frozen=True, eq=False)
class PolarConfig:
    n: int
    info_len: int
    rm_len: int
    frozen: npt.NDArray[np.bool_] = field(repr=False)
    rm_mode: str = "repetition"
    list_size: int = DEFAULT_LIST_SIZE

    @property
    def block_len(self) -> int:
        return 1 << self.n

    @property
    def info_positions(self) -> npt.NDArray[np.int64]:
        return np.flatnonzero(~self.frozen)

    @property
    def frozen_set(self) -> npt.NDArray[np.int64]:
        return np.flatnonzero(self.frozen)


def polar_exponent(info_len: int, rm_len: int) -> int:
    """Code length selection: shrink N when E barely exceeds a power of two, cap at rate 1/8."""
    ceil_log = math.ceil(math.log2(rm_len))
    barely_above = rm_len <= Fraction(9, 8) * 2 ** (ceil_log - 1)
    if barely_above and Fraction(info_len, rm_len) < Fraction(9, 16):
        n1 = ceil_log - 1
    else:
        n1 = ceil_log
    n2 = math.ceil(math.log2(Fraction(info_len) / POLAR_MIN_RATE))
    return max(min(n1, n2, POLAR_MAX_EXPONENT), POLAR_MIN_EXPONENT)


@cache
def subblock_permutation(block_len: int) -> npt.NDArray[np.int64]:
    """``J[i]``: mother-code index sent at interleaved position ``i``."""
    size = block_len // 32
    i = np.arange(block_len)
    pattern = np.asarray(NR_SUBBLOCK_PATTERN)
    perm = pattern[(32 * i) // block_len] * size + i % size
    perm.setflags(write=False)
    return perm


def rate_match_mode(info_len: int, rm_len: int, block_len: int) -> str:
    if rm_len >= block_len:
        return "repetition"
    if Fraction(info_len, rm_len) <= Fraction(7, 16):
        return "puncturing"
    return "shortening"


def _pre_frozen(rm_len: int, block_len: int, mode: str) -> set[int]:
    perm = subblock_permutation(block_len)
    if mode == "puncturing":
        frozen = {int(j) for j in perm[: block_len - rm_len]}
        if rm_len >= 3 * block_len / 4:
            extra = math.ceil(3 * block_len / 4 - rm_len / 2)
        else:
            extra = math.ceil(9 * block_len / 16 - rm_len / 4)
        return frozen | set(range(extra))
    if mode == "shortening":
        return {int(j) for j in perm[rm_len:]}
    return set()


def polar_construct(info_len: int, rm_len: int, list_size: int = DEFAULT_LIST_SIZE) -> PolarConfig:
    """Pick N for (K, E) and freeze everything but the K most reliable usable positions."""
    if info_len < 1:
        raise ConfigurationError("polar code needs at least one information bit")
    if info_len >= rm_len:
        raise ConfigurationError(f"K={info_len} must be below the rate-matched length E={rm_len}")
    if rm_len > MAX_RATE_MATCH_LEN:
        raise UnsupportedError(f"E={rm_len} exceeds the {MAX_RATE_MATCH_LEN}-bit limit")
    if list_size < 1:
        raise ConfigurationError("list size must be positive")
    n = polar_exponent(info_len, rm_len)
    block_len = 1 << n
    if info_len >= block_len:
        raise UnsupportedError(f"K={info_len} does not fit a polar code of length {block_len}")
    mode = rate_match_mode(info_len, rm_len, block_len)
    pre_frozen = _pre_frozen(rm_len, block_len, mode)
    usable = [q for q in POLAR_RELIABILITY_1024 if q < block_len and q not in pre_frozen]
    if len(usable) < info_len:
        raise ConfigurationError(f"only {len(usable)} usable positions for K={info_len}")
    frozen = np.ones(block_len, dtype=bool)
    frozen[usable[-info_len:]] = False
    frozen.setflags(write=False)
    return PolarConfig(
        n=n,
        info_len=info_len,
        rm_len=rm_len,
        frozen=frozen,
        rm_mode=mode,
        list_size=list_size,
    )


def polar_transform(bits: npt.ArrayLike) -> BitBlock:
    """Multiply by the n-fold Kronecker power of [[1,0],[1,1]] along the last axis."""
    x = np.array(bits, dtype=np.uint8, copy=True)
    length = x.shape[-1]
    if length & (length - 1):
        raise FormatError(f"polar transform length {length} is not a power of two")
    step = 1
    while step < length:
        view = x.reshape(*x.shape[:-1], -1, 2, step)
        view[..., 0, :] ^= view[..., 1, :]
        step *= 2
    return x


def polar_encode(info: object, cfg: PolarConfig) -> BitBlock:
    bits = as_bits(info)
    if bits.size != cfg.info_len:
        raise FormatError(f"polar encoder expects {cfg.info_len} bits, got {bits.size}")
    u = np.zeros(cfg.block_len, dtype=np.uint8)
    u[cfg.info_positions] = bits
    return polar_transform(u)


@dataclass(frozen=True, eq=False)
class PolarDecodeResult:
    info_bits: BitBlock
    crc_pass: bool


def _f(a: LlrBlock, b: LlrBlock) -> LlrBlock:
    return np.sign(a) * np.sign(b) * np.minimum(np.abs(a), np.abs(b))


def _g(a: LlrBlock, b: LlrBlock, beta: BitBlock) -> LlrBlock:
    return b + (1.0 - 2.0 * beta) * a


class _ListDecoder:
    """Successive-cancellation list search; working arrays are private to one call."""

    def __init__(self, frozen: npt.NDArray[np.bool_], list_size: int):
        self.frozen = frozen
        self.list_size = list_size
        self.metrics = np.zeros(1)

    def run(self, llr: LlrBlock) -> BitBlock:
        beta, _ = self._node(llr[None, :], 0)
        return beta

    def _node(self, alpha: LlrBlock, lo: int) -> tuple[BitBlock, npt.NDArray[np.int64]]:
        paths, width = alpha.shape
        keep_all = np.arange(paths)
        if self.frozen[lo : lo + width].all():
            # all-frozen subtree decides zeros; penalty is the negative part of its LLRs
            self.metrics = self.metrics + np.sum(np.maximum(-alpha, 0.0), axis=1)
            return np.zeros((paths, width), dtype=np.uint8), keep_all
        if width == 1:
            return self._split(alpha[:, 0])
        half = width // 2
        a, b = alpha[:, :half], alpha[:, half:]
        beta_l, perm_l = self._node(_f(a, b), lo)
        a, b = a[perm_l], b[perm_l]
        beta_r, perm_r = self._node(_g(a, b, beta_l), lo + half)
        beta_l = beta_l[perm_r]
        return np.concatenate([beta_l ^ beta_r, beta_r], axis=1), perm_l[perm_r]

    def _split(self, llr: LlrBlock) -> tuple[BitBlock, npt.NDArray[np.int64]]:
        paths = llr.size
        candidates = np.concatenate(
            [self.metrics + np.maximum(-llr, 0.0), self.metrics + np.maximum(llr, 0.0)],
        )
        survivors = np.argsort(candidates, kind="stable")[: min(self.list_size, 2 * paths)]
        self.metrics = candidates[survivors]
        decisions = (survivors >= paths).astype(np.uint8)
        return decisions[:, None], survivors % paths


def polar_list_decode(llr: LlrBlock, cfg: PolarConfig) -> tuple[BitBlock, LlrBlock]:
    """SCL search without CRC selection: info bits of every surviving path, best metric first."""
    llr = np.asarray(llr, dtype=np.float64).ravel()
    if llr.size != cfg.block_len:
        raise FormatError(f"polar decoder expects {cfg.block_len} LLRs, got {llr.size}")
    decoder = _ListDecoder(cfg.frozen, cfg.list_size)
    codewords = decoder.run(llr)
    order = np.argsort(decoder.metrics, kind="stable")
    candidates = polar_transform(codewords)[order][:, cfg.info_positions]
    return candidates, decoder.metrics[order]


def polar_decode(llr: LlrBlock, cfg: PolarConfig, crc: CrcConfig) -> PolarDecodeResult:
    """CRC-aided SCL: best CRC-passing path, else the best path flagged as a failure."""
    candidates, _ = polar_list_decode(llr, cfg)
    for path in candidates:
        if crc_check(path, crc):
            return PolarDecodeResult(info_bits=path.copy(), crc_pass=True)
    return PolarDecodeResult(info_bits=candidates[0].copy(), crc_pass=False)
