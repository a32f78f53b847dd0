import math

SPEED_OF_LIGHT = 299_792_458.0

SUBCARRIER_SPACING_HZ = 15_000.0
SUBCARRIERS_PER_RB = 12
SYMBOLS_PER_SLOT_NORMAL_CP = 14
SYMBOLS_PER_SLOT_EXTENDED_CP = 12

# Defaults of the canonical scenario set
DEFAULT_CARRIER_FREQ_HZ = 700e6
DEFAULT_BANDWIDTH_MHZ = 5.0
DEFAULT_FFT_SIZE = 512
DEFAULT_DCI_BITS = 12
DEFAULT_LIST_SIZE = 8
DEFAULT_WAVA_ITERATIONS = 2
DEFAULT_MIN_BLOCK_ERRORS = 200
DEFAULT_MAX_BLOCKS = 200_000
DEFAULT_MASTER_SEED = 20180601
DEFAULT_TARGET_BLER = 1e-3
AGGREGATION_LEVELS = (1, 2, 4, 8, 16)

# Scrambling and pilot identities (fixed per standard side)
LTE_CELL_ID = 1
NR_SCRAMBLING_ID = 1
NR_DMRS_SCRAMBLING_ID = 1
NR_DMRS_SLOT = 0

# RNTIs used when CRC masking is switched on
M_RNTI = 0xFFFD
C_RNTI = 0x4601

# Largest rate-matching output accepted for a DCI codeword
MAX_RATE_MATCH_LEN = 8192

# LLR standing in for a bit known to be zero (shortened positions)
KNOWN_BIT_LLR = 1e6

# Channel bandwidth (MHz) -> resource blocks at 15 kHz spacing
LTE_RB_TABLE = {1.4: 6, 3.0: 15, 5.0: 25, 10.0: 50, 15.0: 75, 20.0: 100}
NR_RB_TABLE = {5.0: 25, 10.0: 52, 15.0: 79, 20.0: 106}

# DCI format 1C reserved bits per bandwidth
LTE_1C_RESERVED_BITS = {1.4: 0, 3.0: 2, 5.0: 4, 10.0: 5, 15.0: 6, 20.0: 7}
LTE_1C_NOTIFICATION_BITS = 8
NR_1_0_MIN_BITS = 12

# Nominal delay spreads of the shipped fading profiles
TDL_A_DELAY_SPREAD_S = 30e-9
TDL_C_DELAY_SPREAD_S = 300e-9

SCENARIO_CSV_HEADER = (
    "cnr_db",
    "blocks",
    "block_errors",
    "bits",
    "bit_errors",
    "bler",
    "ber",
    "bler_ci_lo",
    "bler_ci_hi",
)


def fft_size_for(subcarriers: int) -> int:
    """Smallest power of two holding the occupied band with a guard of one third."""
    return max(DEFAULT_FFT_SIZE, 2 ** math.ceil(math.log2(subcarriers * 1.5)))


def max_doppler_hz(speed_kmh: float, carrier_freq_hz: float = DEFAULT_CARRIER_FREQ_HZ) -> float:
    return speed_kmh / 3.6 * carrier_freq_hz / SPEED_OF_LIGHT
