"""Partial inverse design of high-performance concrete mixes.

A strength surrogate and a mask-aware denoising autoencoder train
cooperatively; a trained pair completes partially specified mix designs in
one forward pass. A Gaussian-process + random-walk-sampling baseline and a
cross-method evaluation harness round out the toolkit.
"""

__version__ = "0.1.0"
