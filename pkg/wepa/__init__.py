"""Watermarking with probabilistic automata: keys, decoding, detection, experiments."""

__version__ = "0.3.0"
