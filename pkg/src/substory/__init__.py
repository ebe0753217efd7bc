"""Sub-story detection in short-text streams: HDP, NPMI spectral clustering and LSH."""

__version__ = "0.1.0"
