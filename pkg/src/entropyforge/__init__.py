"""Degree growth, singularity confinement and spectral tools for
nonautonomous rational recurrences and quad-lattice equations."""

__version__ = "0.1.0"
