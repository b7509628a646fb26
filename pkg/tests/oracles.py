"""Independent reference implementations used only by the tests.

Each one is written from the textbook definition, deliberately slow and
without sharing code with the package.
"""

from __future__ import annotations

import itertools
import string
from fractions import Fraction

import numpy as np

# ---------------------------------------------------------------------------
# GF(256), primitive polynomial x^8 + x^4 + x^3 + x^2 + 1
# ---------------------------------------------------------------------------


def gf_mul_slow(a: int, b: int) -> int:
    """Russian-peasant multiplication with reduction by 0x11D."""
    out = 0
    while b:
        if b & 1:
            out ^= a
        b >>= 1
        a <<= 1
        if a & 0x100:
            a ^= 0x11D
    return out


def gf_pow_slow(a: int, n: int) -> int:
    out = 1
    for _ in range(n):
        out = gf_mul_slow(out, a)
    return out


def generator_slow(degree: int) -> list[int]:
    """prod_{i<degree} (x - alpha^i), coefficients highest power first."""
    g = [1]
    for i in range(degree):
        root = gf_pow_slow(2, i)
        nxt = g + [0]
        for j, c in enumerate(g):
            nxt[j + 1] ^= gf_mul_slow(c, root)
        g = nxt
    return g


def poly_mod_slow(dividend: list[int], divisor: list[int]) -> list[int]:
    """Remainder of GF(256) long division, highest power first."""
    rem = list(dividend)
    for i in range(len(rem) - len(divisor) + 1):
        coef = rem[i]
        if coef:
            for j, d in enumerate(divisor):
                rem[i + j] ^= gf_mul_slow(d, coef)
    return rem[len(rem) - len(divisor) + 1:]


def rs_remainder_slow(data: bytes, n_ec: int = 26) -> bytes:
    return bytes(poly_mod_slow(list(data) + [0] * n_ec, generator_slow(n_ec)))


# ---------------------------------------------------------------------------
# Byte-mode bit assembly
# ---------------------------------------------------------------------------


def payload_codewords_slow(text: bytes, n_data: int = 428) -> bytes:
    bits = "0100" + format(len(text), "016b") + "".join(format(b, "08b") for b in text)
    bits += "0" * min(4, n_data * 8 - len(bits))
    bits += "0" * (-len(bits) % 8)
    out = [int(bits[i:i + 8], 2) for i in range(0, len(bits), 8)]
    pads = itertools.cycle((0xEC, 0x11))
    while len(out) < n_data:
        out.append(next(pads))
    return bytes(out)


# ---------------------------------------------------------------------------
# Mask penalty rules, straight loops
# ---------------------------------------------------------------------------


def penalty_slow(m) -> int:
    m = [list(map(int, row)) for row in np.asarray(m)]
    n = len(m)
    total = 0
    lines = m + [list(col) for col in zip(*m)]
    # N1: runs of >= 5 same-colour cells
    for line in lines:
        run = 1
        for i in range(1, n + 1):
            if i < n and line[i] == line[i - 1]:
                run += 1
            else:
                if run >= 5:
                    total += 3 + (run - 5)
                run = 1
    # N2: 2x2 same-colour blocks
    for r in range(n - 1):
        for c in range(n - 1):
            if m[r][c] == m[r][c + 1] == m[r + 1][c] == m[r + 1][c + 1]:
                total += 3
    # N3: finder-like 1:1:3:1:1 with four light cells on one side
    pats = ([1, 0, 1, 1, 1, 0, 1, 0, 0, 0, 0], [0, 0, 0, 0, 1, 0, 1, 1, 1, 0, 1])
    for line in lines:
        for i in range(n - 10):
            if line[i:i + 11] in pats:
                total += 40
    # N4: dark proportion deviation in 5% steps
    dark = sum(map(sum, m))
    k = abs(dark * 20 - n * n * 10) // (n * n)
    total += 10 * k
    return total


# ---------------------------------------------------------------------------
# Third-party matrix and decoder
# ---------------------------------------------------------------------------


def qrcode_matrix(text: bytes, mask: int) -> np.ndarray:
    """Reference symbol from the `qrcode` package with a forced mask."""
    import qrcode
    from qrcode.util import MODE_8BIT_BYTE, QRData

    q = qrcode.QRCode(version=13, error_correction=qrcode.constants.ERROR_CORRECT_L,
                      box_size=1, border=0, mask_pattern=mask)
    q.add_data(QRData(text, mode=MODE_8BIT_BYTE))
    q.make(fit=False)
    return np.array(q.get_matrix(), dtype=np.uint8)


_DETECTOR = None


def decode_matrix(matrix: np.ndarray):
    """Decode with OpenCV's QR reader after adding a quiet zone and upscaling."""
    import cv2

    global _DETECTOR
    if _DETECTOR is None:
        _DETECTOR = cv2.QRCodeDetectorAruco()
    img = ((1 - np.asarray(matrix, dtype=np.uint8)) * 255).astype(np.uint8)
    img = np.pad(img, 4, constant_values=255)
    img = cv2.resize(img, None, fx=4, fy=4, interpolation=cv2.INTER_NEAREST)
    text, _, _ = _DETECTOR.detectAndDecode(img)
    return text


PRINTABLE = string.ascii_letters + string.digits + "-._~:/?#[]@!$&'()*+,;=%"


def random_url(rng, length: int) -> str:
    head = "https://" if rng.random() < 0.5 else "http://"
    body = "".join(PRINTABLE[i] for i in rng.integers(0, len(PRINTABLE), max(length - len(head), 0)))
    return (head + body)[:length]


# ---------------------------------------------------------------------------
# Metrics and splits
# ---------------------------------------------------------------------------


def auc_pairs(labels, scores) -> Fraction:
    pos = [s for s, y in zip(scores, labels) if y == 1]
    neg = [s for s, y in zip(scores, labels) if y == 0]
    credit = Fraction(0)
    for p in pos:
        for q in neg:
            if p > q:
                credit += 1
            elif p == q:
                credit += Fraction(1, 2)
    return credit / (len(pos) * len(neg))


def confusion_slow(labels, scores, threshold=0.5):
    """(tp, fp, tn, fn, accuracy, precision, recall, f1) by counting one row at a time."""
    tp = fp = tn = fn = 0
    for y, s in zip(labels, scores):
        if s >= threshold:
            tp, fp = (tp + 1, fp) if y == 1 else (tp, fp + 1)
        else:
            fn, tn = (fn + 1, tn) if y == 1 else (fn, tn + 1)
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return tp, fp, tn, fn, (tp + tn) / len(labels), precision, recall, f1


def gini(pos: int, total: int) -> Fraction:
    if total == 0:
        return Fraction(0)
    p = Fraction(pos, total)
    return 1 - p * p - (1 - p) * (1 - p)


def best_stump_slow(X, y, min_samples_leaf: int = 1):
    """Exhaustive best Gini split; ties to the lowest feature index. None if no valid split."""
    X = np.asarray(X)
    y = np.asarray(y)
    n = len(y)
    best = None
    for f in range(X.shape[1]):
        right = X[:, f] != 0
        nr = int(right.sum())
        nl = n - nr
        if nr < min_samples_leaf or nl < min_samples_leaf:
            continue
        pr = int(y[right].sum())
        pl = int(y[~right].sum())
        impurity = Fraction(nl, n) * gini(pl, nl) + Fraction(nr, n) * gini(pr, nr)
        if best is None or impurity < best[1]:
            best = (f, impurity)
    return best
