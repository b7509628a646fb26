"""Phishing detection from the pixels of QR codes that encode URLs."""

__version__ = "0.1.0"
