"""QR version 13-L byte-mode encoder.

Produces the 69x69 module grid (dark = 1, light = 0) that the classifiers
consume as raw pixel features. Only the single configuration used throughout
the pipeline is supported: version 13, error-correction level L, byte mode,
one pixel per module and no quiet zone.

Symbol layout for 13-L:

    532 codewords = 428 data + 104 EC
    4 blocks, each (133 total, 107 data, 26 EC)
    alignment centres at {6, 34, 62}
    no remainder bits
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import CapacityExceeded

VERSION = 13
SIZE = 4 * VERSION + 17  # 69
EC_LEVEL_BITS = 0b01  # level L in the format field

NUM_BLOCKS = 4
BLOCK_DATA = 107
BLOCK_EC = 26
BLOCK_TOTAL = BLOCK_DATA + BLOCK_EC
DATA_CODEWORDS = NUM_BLOCKS * BLOCK_DATA  # 428
TOTAL_CODEWORDS = NUM_BLOCKS * BLOCK_TOTAL  # 532

MODE_BYTE = 0b0100
COUNT_BITS = 16  # byte-mode character count width for versions 10..26
CAPACITY = (DATA_CODEWORDS * 8 - 4 - COUNT_BITS) // 8  # 425

ALIGNMENT_CENTRES = (6, 34, 62)
PAD_BYTES = (0xEC, 0x11)

# penalty weights N1..N4
N1, N2, N3, N4 = 3, 3, 40, 10


@dataclass(frozen=True)
class QrConfig:
    version: int = VERSION
    ec_level: str = "L"
    box_size: int = 1
    border: int = 0

    def __post_init__(self):
        if (self.version, self.ec_level, self.box_size, self.border) != (VERSION, "L", 1, 0):
            raise ValueError(
                "only version 13, EC level L, box_size 1, border 0 is supported; "
                f"got {self.version}, {self.ec_level}, {self.box_size}, {self.border}"
            )

    @property
    def side(self) -> int:
        return 4 * self.version + 17


DEFAULT_CONFIG = QrConfig()


# ---------------------------------------------------------------------------
# GF(256) and Reed-Solomon
# ---------------------------------------------------------------------------

def _build_gf_tables():
    exp = np.zeros(512, dtype=np.int32)
    log = np.zeros(256, dtype=np.int32)
    x = 1
    for i in range(255):
        exp[i] = x
        log[x] = i
        x <<= 1
        if x & 0x100:
            x ^= 0x11D
    exp[255:510] = exp[:255]
    return exp, log


GF_EXP, GF_LOG = _build_gf_tables()


def gf_mul(a: int, b: int) -> int:
    if a == 0 or b == 0:
        return 0
    return int(GF_EXP[GF_LOG[a] + GF_LOG[b]])


@lru_cache(maxsize=None)
def rs_generator(degree: int) -> tuple[int, ...]:
    """Coefficients of prod_{i<degree} (x - a^i), highest power first (monic)."""
    poly = [1]
    for i in range(degree):
        root = int(GF_EXP[i])
        nxt = poly + [0]
        for j, c in enumerate(poly):
            nxt[j + 1] ^= gf_mul(c, root)
        poly = nxt
    return tuple(poly)


def rs_ec_block(data: bytes, n_ec: int = BLOCK_EC) -> bytes:
    """Systematic RS parity: remainder of data(x)*x^n_ec mod the generator."""
    data = bytes(data)
    if len(data) != BLOCK_DATA:
        raise ValueError(f"expected a {BLOCK_DATA}-byte block, got {len(data)}")
    gen_log = np.array([GF_LOG[g] for g in rs_generator(n_ec)[1:]], dtype=np.int32)
    rem = np.zeros(n_ec + 1, dtype=np.int32)
    for byte in data:
        factor = byte ^ int(rem[0])
        rem[:-1] = rem[1:]
        rem[-1] = 0
        if factor:
            rem[:-1] ^= GF_EXP[GF_LOG[factor] + gen_log]
    rem = rem[:-1].astype(np.uint8)
    return bytes(rem)


# ---------------------------------------------------------------------------
# Data codewords
# ---------------------------------------------------------------------------

def encode_payload_bits(text: bytes) -> bytes:
    """Byte-mode segment, terminator, bit padding and pad codewords (428 bytes)."""
    if isinstance(text, str):
        text = text.encode("utf-8")
    if len(text) > CAPACITY:
        raise CapacityExceeded(len(text), CAPACITY)

    bits = []

    def put(value, width):
        bits.extend((value >> (width - 1 - i)) & 1 for i in range(width))

    put(MODE_BYTE, 4)
    put(len(text), COUNT_BITS)
    for b in text:
        put(b, 8)
    capacity_bits = DATA_CODEWORDS * 8
    bits.extend([0] * min(4, capacity_bits - len(bits)))
    bits.extend([0] * (-len(bits) % 8))

    out = bytearray(np.packbits(np.array(bits, dtype=np.uint8)).tobytes())
    i = 0
    while len(out) < DATA_CODEWORDS:
        out.append(PAD_BYTES[i % 2])
        i += 1
    return bytes(out)


def split_blocks(data_codewords: bytes) -> list[tuple[bytes, bytes]]:
    if len(data_codewords) != DATA_CODEWORDS:
        raise ValueError(f"expected {DATA_CODEWORDS} data codewords, got {len(data_codewords)}")
    blocks = []
    for b in range(NUM_BLOCKS):
        chunk = data_codewords[b * BLOCK_DATA:(b + 1) * BLOCK_DATA]
        blocks.append((chunk, rs_ec_block(chunk)))
    return blocks


def interleave(blocks) -> bytes:
    """Column-wise interleave of data bytes across blocks, then EC bytes."""
    if len(blocks) != NUM_BLOCKS:
        raise ValueError(f"expected {NUM_BLOCKS} blocks, got {len(blocks)}")
    for data, ec in blocks:
        if len(data) != BLOCK_DATA or len(ec) != BLOCK_EC:
            raise ValueError("block shape must be (107 data, 26 ec)")
    data = np.array([list(d) for d, _ in blocks], dtype=np.uint8)
    ec = np.array([list(e) for _, e in blocks], dtype=np.uint8)
    return data.T.tobytes() + ec.T.tobytes()


# ---------------------------------------------------------------------------
# Matrix construction
# ---------------------------------------------------------------------------

def _format_bits(mask_id: int) -> int:
    data = (EC_LEVEL_BITS << 3) | mask_id
    rem = data
    for _ in range(10):
        rem = (rem << 1) ^ ((rem >> 9) * 0x537)
    return ((data << 10) | rem) ^ 0x5412


def _version_bits(version: int) -> int:
    rem = version
    for _ in range(12):
        rem = (rem << 1) ^ ((rem >> 11) * 0x1F25)
    return (version << 12) | rem


@lru_cache(maxsize=None)
def _function_template():
    """(values, is_function) for every payload-independent module.

    Format areas are reserved here and filled per mask in build_matrix.
    """
    values = np.zeros((SIZE, SIZE), dtype=np.uint8)
    func = np.zeros((SIZE, SIZE), dtype=bool)

    def set_mod(r, c, dark):
        values[r, c] = 1 if dark else 0
        func[r, c] = True

    # timing patterns first; finders and alignment overwrite overlaps
    for i in range(SIZE):
        set_mod(6, i, i % 2 == 0)
        set_mod(i, 6, i % 2 == 0)

    # finders + separators
    for r0, c0 in ((0, 0), (0, SIZE - 7), (SIZE - 7, 0)):
        for dr in range(-1, 8):
            for dc in range(-1, 8):
                r, c = r0 + dr, c0 + dc
                if not (0 <= r < SIZE and 0 <= c < SIZE):
                    continue
                dist = max(abs(dr - 3), abs(dc - 3))
                set_mod(r, c, dist != 2 and dist != 4)

    # alignment patterns, skipping the three finder corners
    last = len(ALIGNMENT_CENTRES) - 1
    for i, cr in enumerate(ALIGNMENT_CENTRES):
        for j, cc in enumerate(ALIGNMENT_CENTRES):
            if (i, j) in ((0, 0), (0, last), (last, 0)):
                continue
            for dr in range(-2, 3):
                for dc in range(-2, 3):
                    set_mod(cr + dr, cc + dc, max(abs(dr), abs(dc)) != 1)

    # format areas (reserved), dark module
    for i in range(9):
        func[8, i] = func[i, 8] = True
    for i in range(8):
        func[8, SIZE - 1 - i] = True
        func[SIZE - 1 - i, 8] = True
    set_mod(SIZE - 8, 8, True)

    # version information (18 bits, both copies)
    vbits = _version_bits(VERSION)
    for i in range(18):
        bit = (vbits >> i) & 1
        a, b = SIZE - 11 + i % 3, i // 3
        set_mod(b, a, bit)
        set_mod(a, b, bit)

    values.flags.writeable = False
    func.flags.writeable = False
    return values, func


@lru_cache(maxsize=None)
def _data_positions():
    """(rows, cols) of data modules in zigzag placement order."""
    _, func = _function_template()
    rows, cols = [], []
    right = SIZE - 1
    upward = True
    while right >= 1:
        if right == 6:
            right = 5
        for vert in range(SIZE):
            r = SIZE - 1 - vert if upward else vert
            for c in (right, right - 1):
                if not func[r, c]:
                    rows.append(r)
                    cols.append(c)
        upward = not upward
        right -= 2
    rows = np.array(rows, dtype=np.intp)
    cols = np.array(cols, dtype=np.intp)
    assert rows.size == TOTAL_CODEWORDS * 8, rows.size
    return rows, cols


def _mask_condition(mask_id: int, r, c):
    if mask_id == 0:
        return (r + c) % 2 == 0
    if mask_id == 1:
        return r % 2 == 0
    if mask_id == 2:
        return c % 3 == 0
    if mask_id == 3:
        return (r + c) % 3 == 0
    if mask_id == 4:
        return (r // 2 + c // 3) % 2 == 0
    if mask_id == 5:
        return (r * c) % 2 + (r * c) % 3 == 0
    if mask_id == 6:
        return ((r * c) % 2 + (r * c) % 3) % 2 == 0
    if mask_id == 7:
        return ((r + c) % 2 + (r * c) % 3) % 2 == 0
    raise ValueError(f"mask id must be in 0..7, got {mask_id}")


@lru_cache(maxsize=None)
def _mask_pattern(mask_id: int) -> np.ndarray:
    r, c = np.indices((SIZE, SIZE))
    pattern = _mask_condition(mask_id, r, c).astype(np.uint8)
    pattern.flags.writeable = False
    return pattern


def function_mask() -> np.ndarray:
    """Boolean grid marking function-pattern modules (finders, timing, format, ...)."""
    return _function_template()[1].copy()


def build_matrix(stream: bytes, mask_id: int) -> np.ndarray:
    if len(stream) != TOTAL_CODEWORDS:
        raise ValueError(f"expected {TOTAL_CODEWORDS}-byte stream, got {len(stream)}")
    if not 0 <= mask_id <= 7:
        raise ValueError(f"mask id must be in 0..7, got {mask_id}")
    values, func = _function_template()
    m = values.copy()
    rows, cols = _data_positions()
    bits = np.unpackbits(np.frombuffer(bytes(stream), dtype=np.uint8))
    m[rows, cols] = bits ^ _mask_pattern(mask_id)[rows, cols]

    fbits = _format_bits(mask_id)
    for i, (a, b) in enumerate(_format_positions()):
        m[a] = m[b] = (fbits >> i) & 1
    return m


@lru_cache(maxsize=None)
def _format_positions():
    """(vertical, horizontal) cell of each of the 15 format bits, LSB first."""
    out = []
    for i in range(15):
        # column 8: around the top-left finder, then down the bottom-left
        if i < 6:
            a = (i, 8)
        elif i < 8:
            a = (i + 1, 8)
        else:
            a = (SIZE - 15 + i, 8)
        # row 8: along the top-right finder, then left of the top-left finder
        if i < 8:
            b = (8, SIZE - 1 - i)
        elif i == 8:
            b = (8, 7)
        else:
            b = (8, 14 - i)
        out.append((a, b))
    return tuple(out)


def format_mask() -> np.ndarray:
    """Boolean grid of the 30 format-information cells (they encode the mask id)."""
    out = np.zeros((SIZE, SIZE), dtype=bool)
    for a, b in _format_positions():
        out[a] = out[b] = True
    return out


# ---------------------------------------------------------------------------
# Mask selection
# ---------------------------------------------------------------------------

# 1:1:3:1:1 finder-like run with 4 light modules on one side, as 11-bit codes
_FINDER_LIKE = (0b10111010000, 0b00001011101)
_WINDOW_WEIGHTS = 1 << np.arange(10, -1, -1)


def _run_penalty(lines: np.ndarray) -> int:
    # sentinel column keeps runs from crossing line boundaries
    padded = np.concatenate([lines, np.full((lines.shape[0], 1), 2, dtype=lines.dtype)], axis=1)
    flat = padded.ravel()
    starts = np.flatnonzero(np.diff(flat) != 0) + 1
    bounds = np.concatenate(([0], starts, [flat.size]))
    lengths = np.diff(bounds)
    long_runs = lengths[lengths >= 5]
    return int(np.sum(N1 + (long_runs - 5)))


def penalty_breakdown(m: np.ndarray) -> tuple[int, int, int, int]:
    """Mask penalty terms (N1 runs, N2 2x2 blocks, N3 finder-like, N4 balance)."""
    m = np.asarray(m, dtype=np.int64)
    p1 = _run_penalty(m) + _run_penalty(m.T)

    blocks = (m[:-1, :-1] == m[1:, :-1]) & (m[:-1, :-1] == m[:-1, 1:]) & (m[:-1, :-1] == m[1:, 1:])
    p2 = N2 * int(blocks.sum())

    p3 = 0
    for lines in (m, m.T):
        codes = sliding_window_view(lines, 11, axis=1) @ _WINDOW_WEIGHTS
        for pat in _FINDER_LIKE:
            p3 += N3 * int(np.count_nonzero(codes == pat))

    total = m.size
    dark = int(m.sum())
    p4 = N4 * (abs(20 * dark - 10 * total) // total)
    return p1, p2, p3, p4


def penalty(m: np.ndarray) -> int:
    return sum(penalty_breakdown(m))


def select_mask(candidates) -> tuple[int, np.ndarray]:
    """Pick the lowest-penalty candidate; ties go to the lowest mask id."""
    best_id, best_score = None, None
    for mask_id, cand in enumerate(candidates):
        score = penalty(cand)
        if best_score is None or score < best_score:
            best_id, best_score = mask_id, score
    return best_id, candidates[best_id]


def encode(text, config: QrConfig = DEFAULT_CONFIG) -> np.ndarray:
    """Encode a byte string as a 69x69 uint8 matrix (1 = dark)."""
    if not isinstance(config, QrConfig):
        raise TypeError("config must be a QrConfig")
    stream = interleave(split_blocks(encode_payload_bits(text)))
    candidates = [build_matrix(stream, k) for k in range(8)]
    return select_mask(candidates)[1]


def write_pgm(matrix: np.ndarray, path) -> None:
    """Binary P5 greyscale: dark -> 0, light -> 255, one byte per module."""
    m = np.asarray(matrix)
    pixels = np.where(m.astype(bool), 0, 255).astype(np.uint8)
    h, w = pixels.shape
    Path(path).write_bytes(f"P5\n{w} {h}\n255\n".encode("ascii") + pixels.tobytes())


def read_pgm(path) -> np.ndarray:
    """Read a P5 file written by this package back into raw byte values."""
    raw = Path(path).read_bytes()
    parts = raw.split(b"\n", 3)
    if parts[0] != b"P5":
        raise ValueError("not a binary PGM file")
    w, h = (int(v) for v in parts[1].split())
    return np.frombuffer(parts[3], dtype=np.uint8, count=w * h).reshape(h, w)
