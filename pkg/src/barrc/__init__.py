"""barrc: static analysis and auto-fixing for the BARR-C:2018 embedded C style."""

__version__ = "0.1.0"
