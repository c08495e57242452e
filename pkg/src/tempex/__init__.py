"""Temporal expression extraction toolkit.

Linear-chain CRF identification with a probabilistic post-processing
pipeline, rule-based TIMEX3 normalization anchored to the document
creation time, and strict/lenient span-matching evaluation.
"""

__version__ = "0.1.0"
