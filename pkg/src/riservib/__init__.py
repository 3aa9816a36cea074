"""Environmental-load clustering and time-domain VIV response prediction
for slender marine risers."""

__version__ = "0.1.0"
