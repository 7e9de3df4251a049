"""Exact certificates for cohomological stability of syzygy bundles on
Enriques and bielliptic surfaces."""

__version__ = "0.1.0"
