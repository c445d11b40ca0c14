"""Extracts last-token hidden states from a causal LM into the binary
embedding format consumed by the langsep toolkit."""

__version__ = "0.1.0"
