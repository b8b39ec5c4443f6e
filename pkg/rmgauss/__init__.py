"""
rmgauss: best-fit Gaussian means by truncated Robbins-Monro.
"""

__version__ = "1.0.0"
