"""Crystal pseudobases of level-zero fundamental modules of types G2^(1) and D4^(3)."""

__version__ = "0.1.0"
