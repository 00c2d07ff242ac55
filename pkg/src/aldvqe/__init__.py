"""Reaction energetics with (ADAPT-)UCCSD VQE, noisy CNT-style emulation and PMSV mitigation."""
__version__ = "0.1.0"
