"""Synthetic labelled URL corpora for demos and tests.

The generator only imitates broad structural differences between benign and
phishing URLs (length, subdomain depth, credential-themed tokens, raw IPs,
long query strings). It is not a substitute for a real labelled corpus.
"""

from __future__ import annotations

import csv
import string

import numpy as np

from .dataset import UrlRecord

_WORDS = (
    "news", "shop", "mail", "cloud", "photo", "travel", "music", "bank", "school", "health",
    "market", "sport", "games", "city", "store", "media", "blog", "forum", "docs", "maps",
    "video", "weather", "food", "books", "auto", "home", "art", "tech", "design", "career",
)
_TLDS = ("com", "org", "net", "edu", "io", "co.uk", "de", "fr")
_BAIT = ("login", "verify", "secure", "account", "update", "signin", "webscr", "confirm",
         "billing", "support", "wallet", "recover", "unlock", "session", "auth")
_SAFE_CHARS = string.ascii_lowercase + string.digits


def _token(rng, lo, hi, alphabet=_SAFE_CHARS):
    n = int(rng.integers(lo, hi + 1))
    return "".join(alphabet[i] for i in rng.integers(0, len(alphabet), size=n))


def _legit(rng) -> str:
    host = f"{rng.choice(['www.', '', 'm.'])}{rng.choice(_WORDS)}{rng.choice(['', str(int(rng.integers(1, 99)))])}"
    url = f"{rng.choice(['http://', 'https://'])}{host}.{rng.choice(_TLDS)}"
    for _ in range(int(rng.integers(0, 4))):
        url += "/" + rng.choice(_WORDS)
    if rng.random() < 0.25:
        url += f"/{_token(rng, 3, 12)}.html"
    if rng.random() < 0.15:
        url += f"?id={int(rng.integers(1, 10**5))}"
    return url


def _phish(rng) -> str:
    if rng.random() < 0.2:
        host = ".".join(str(int(v)) for v in rng.integers(1, 255, size=4))
    else:
        parts = [rng.choice(_BAIT), rng.choice(_WORDS), _token(rng, 4, 10)]
        rng.shuffle(parts)
        host = "-".join(parts[: int(rng.integers(2, 4))])
        host += "." + ".".join(_token(rng, 3, 8) for _ in range(int(rng.integers(0, 3))))
        host = host.rstrip(".") + "." + rng.choice(_TLDS)
    url = f"{rng.choice(['http://', 'http://', 'https://'])}{host}"
    for _ in range(int(rng.integers(1, 5))):
        url += "/" + rng.choice([rng.choice(_BAIT), _token(rng, 5, 20), rng.choice(_WORDS)])
    if rng.random() < 0.7:
        url += "?" + "&".join(f"{_token(rng, 2, 6)}={_token(rng, 8, 40)}"
                              for _ in range(int(rng.integers(1, 4))))
    return url


def generate_records(n: int, seed: int = 0, phishing_fraction: float = 0.5,
                     label_noise: float = 0.05) -> list[UrlRecord]:
    """n URL records; a `label_noise` fraction of samples is drawn from the other class."""
    rng = np.random.default_rng(seed)
    n_phish = int(round(n * phishing_fraction))
    labels = np.array([1] * n_phish + [0] * (n - n_phish))
    rng.shuffle(labels)
    records = []
    for label in labels:
        style_phish = bool(label) != (rng.random() < label_noise)
        url = _phish(rng) if style_phish else _legit(rng)
        records.append(UrlRecord(url.encode("ascii"), int(label)))
    return records


def write_csv(records, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["url", "label"])
        for rec in records:
            writer.writerow([rec.url.decode("utf-8", errors="surrogateescape"), rec.label])
