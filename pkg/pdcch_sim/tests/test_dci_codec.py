import numpy as np
import pytest

from pdcch_sim.src.dci_codec import (
    CrcConfig,
    CrcPolynomial,
    DciFormat,
    Standard,
    build_dci,
    crc_attach,
    crc_check,
    crc_config_for,
)
from pdcch_sim.utils.bits import int_to_bits
from pdcch_sim.utils.errors import ConfigurationError, FormatError
from tests.conftest import crc_long_division


def test_build_dci_lte_5mhz_appends_reserved_bits():
    msg = build_dci(DciFormat.LTE_1C, 5.0, np.ones(8, dtype=np.uint8))
    assert len(msg) == 12
    assert msg.payload_bits[:8].tolist() == [1] * 8
    assert msg.payload_bits[8:].tolist() == [0] * 4


def test_build_dci_lte_1p4mhz_has_no_reserved_bits():
    msg = build_dci(DciFormat.LTE_1C, 1.4, np.ones(8, dtype=np.uint8))
    assert len(msg) == 8


def test_build_dci_nr_zero_payload():
    msg = build_dci(DciFormat.NR_1_0, 5.0, np.zeros(12, dtype=np.uint8))
    assert msg.payload_bits.tolist() == [0] * 12


def test_build_dci_rejects_wrong_lengths():
    with pytest.raises(FormatError):
        build_dci(DciFormat.LTE_1C, 5.0, np.ones(9, dtype=np.uint8))
    with pytest.raises(FormatError):
        build_dci(DciFormat.NR_1_0, 5.0, np.ones(11, dtype=np.uint8))


def test_build_dci_rejects_unknown_bandwidth():
    with pytest.raises(ConfigurationError):
        build_dci(DciFormat.LTE_1C, 7.0, np.ones(8, dtype=np.uint8))


def test_standard_maps_to_its_dci_format():
    assert Standard.LTE.dci_format is DciFormat.LTE_1C
    assert Standard.NR.dci_format is DciFormat.NR_1_0


@pytest.mark.parametrize("poly", list(CrcPolynomial))
def test_crc_attach_zero_message_gives_zero_parity(poly):
    word = crc_attach(np.zeros(12, dtype=np.uint8), CrcConfig(poly))
    assert word.size == 12 + poly.length
    assert not word.any()


@pytest.mark.parametrize("poly", list(CrcPolynomial))
def test_crc_attach_matches_long_division(poly):
    rng = np.random.default_rng(1)
    for _ in range(20):
        msg = rng.integers(0, 2, 40, dtype=np.uint8)
        parity = crc_attach(msg, CrcConfig(poly))[-poly.length :]
        assert parity.tolist() == crc_long_division(msg, poly.generator, poly.length)


def test_crc24c_ones_prepend_matches_long_division_over_prefixed_message():
    rng = np.random.default_rng(2)
    msg = rng.integers(0, 2, 12, dtype=np.uint8)
    cfg = crc_config_for(DciFormat.NR_1_0)
    expected = crc_long_division([1] * 24 + msg.tolist(), 0xB2B117, 24)
    assert crc_attach(msg, cfg)[-24:].tolist() == expected


def test_rnti_mask_flips_exactly_the_mask_bits():
    rng = np.random.default_rng(3)
    msg = rng.integers(0, 2, 12, dtype=np.uint8)
    plain = crc_attach(msg, crc_config_for(DciFormat.NR_1_0))
    masked = crc_attach(msg, crc_config_for(DciFormat.NR_1_0, rnti=0xFFFF))
    diff = plain ^ masked
    assert not diff[:-16].any()
    assert diff[-16:].tolist() == [1] * 16


@pytest.mark.parametrize("fmt", list(DciFormat))
def test_rnti_masking_twice_restores_plain_crc(fmt):
    rng = np.random.default_rng(4)
    for rnti in (0x0001, 0x4601, 0xFFFD):
        msg = rng.integers(0, 2, 12, dtype=np.uint8)
        plain = crc_attach(msg, crc_config_for(fmt))
        masked = crc_attach(msg, crc_config_for(fmt, rnti=rnti))
        mask = int_to_bits(rnti, 16)
        assert not np.array_equal(masked, plain)
        unmasked = masked.copy()
        unmasked[-16:] ^= mask
        assert np.array_equal(unmasked, plain)
        assert crc_check(unmasked, crc_config_for(fmt))


def test_crc_check_round_trip_and_single_bit_error():
    rng = np.random.default_rng(4)
    for fmt in DciFormat:
        cfg = crc_config_for(fmt, rnti=0x4601)
        word = crc_attach(rng.integers(0, 2, 20, dtype=np.uint8), cfg)
        assert crc_check(word, cfg)
        for pos in range(word.size):
            flipped = word.copy()
            flipped[pos] ^= 1
            assert not crc_check(flipped, cfg)


def test_crc_check_all_zero_word_passes_without_mask():
    assert crc_check(np.zeros(28, dtype=np.uint8), CrcConfig(CrcPolynomial.CRC16_LTE))


def test_crc_check_masked_word_fails_under_other_rnti():
    cfg = crc_config_for(DciFormat.LTE_1C, rnti=0xFFFD)
    word = crc_attach(np.ones(12, dtype=np.uint8), cfg)
    assert not crc_check(word, crc_config_for(DciFormat.LTE_1C, rnti=0x1234))


def test_crc_rejects_empty_and_short_inputs():
    cfg = CrcConfig(CrcPolynomial.CRC16_LTE)
    with pytest.raises(FormatError):
        crc_attach(np.zeros(0, dtype=np.uint8), cfg)
    with pytest.raises(FormatError):
        crc_check(np.zeros(16, dtype=np.uint8), cfg)


def test_crc_config_rejects_wide_rnti():
    with pytest.raises(ConfigurationError):
        CrcConfig(CrcPolynomial.CRC16_LTE, rnti_mask=1 << 16)
