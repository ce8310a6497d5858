"""Autoencoder-augmented 1-D CNN surrogates for the CHF look-up table."""
__version__ = "0.1.0"
