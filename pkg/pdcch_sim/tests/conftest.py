from pathlib import Path

import numpy as np
import yaml


def crc_long_division(bits, generator: int, length: int) -> list[int]:
    """Remainder of bits(D)·D^L over GF(2) by schoolbook division."""
    poly = [1] + [(generator >> (length - 1 - i)) & 1 for i in range(length)]
    work = [int(b) for b in bits] + [0] * length
    for i in range(len(bits)):
        if work[i]:
            for j, p in enumerate(poly):
                work[i + j] ^= p
    return work[-length:]


def tbcc_shift_register(info, generators=(0o133, 0o171, 0o165)) -> list[int]:
    """Plain rate-1/3 encoder run twice around the circle from the zero state; keeps lap two."""
    state = [0] * 6
    out: list[int] = []
    for bit in [int(b) for b in info] * 2:
        reg = [bit, *state]
        for g in generators:
            out.append(sum(((g >> (6 - d)) & 1) * reg[d] for d in range(7)) % 2)
        state = reg[:6]
    return out[len(out) // 2 :]


def polar_generator_matrix(block_len: int) -> np.ndarray:
    kernel = np.array([[1, 0], [1, 1]], dtype=np.int64)
    g = np.ones((1, 1), dtype=np.int64)
    while g.shape[0] < block_len:
        g = np.kron(g, kernel)
    return g


def sc_decode(llr: np.ndarray, frozen: np.ndarray) -> list[int]:
    """Textbook successive cancellation with min-sum check nodes; returns u-hat."""

    def node(alpha: np.ndarray, lo: int) -> tuple[np.ndarray, list[int]]:
        if alpha.size == 1:
            u = 0 if frozen[lo] else int(alpha[0] < 0)
            return np.array([u], dtype=np.uint8), [u]
        half = alpha.size // 2
        a, b = alpha[:half], alpha[half:]
        f = np.sign(a) * np.sign(b) * np.minimum(np.abs(a), np.abs(b))
        x_left, u_left = node(f, lo)
        x_right, u_right = node(b + (1.0 - 2.0 * x_left) * a, lo + half)
        return np.concatenate([x_left ^ x_right, x_right]), u_left + u_right

    return node(np.asarray(llr, dtype=np.float64), 0)[1]


def gold_lfsr(seed: int, length: int) -> list[int]:
    """Bitwise dual-LFSR Gold generator with the 1600-chip offset."""
    x1 = [1] + [0] * 30
    x2 = [(seed >> i) & 1 for i in range(31)]
    for n in range(length + 1600):
        x1.append(x1[n + 3] ^ x1[n])
        x2.append(x2[n + 3] ^ x2[n + 2] ^ x2[n + 1] ^ x2[n])
    return [x1[n + 1600] ^ x2[n + 1600] for n in range(length)]


def bpsk_llr(bits, sigma: float, rng: np.random.Generator) -> np.ndarray:
    """LLRs of BPSK (0 -> +1) bits over real AWGN with standard deviation ``sigma``."""
    y = 1.0 - 2.0 * np.asarray(bits, dtype=np.float64)
    if sigma > 0:
        y = y + sigma * rng.standard_normal(y.size)
        return 2.0 * y / sigma**2
    return 1e3 * y


def write_scenario(directory: Path, name: str = "scenario.yaml", **overrides) -> Path:
    """Small noiseless NR AL1 scenario; keyword overrides replace top-level keys."""
    data = {
        "name": "tiny",
        "standard": "nr",
        "aggregation_level": 1,
        "channel": {"model": "awgn"},
        "cnr_db": [0.0, 1.0],
        "stop": {"min_block_errors": 1, "max_blocks": 4},
        "master_seed": 7,
        "noiseless": True,
    }
    data.update(overrides)
    path = directory / name
    path.write_text(yaml.dump(data, sort_keys=False))
    return path
