"""A deterministic stream-sampling language and its verification toolchain."""

__version__ = "0.1.0"
