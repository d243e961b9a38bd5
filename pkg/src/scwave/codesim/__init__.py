"""Finite-length validation: sampled instances and BP decoding."""

from .channels import ChannelModel, awgn_entropy, binary_entropy
from .decoders import DecodeTrace, bp_decode_bec, bp_decode_bms, sample_erasures
from .front import NoFrontError, empirical_speed, front_positions
from .graph import CodeInstance, QuantizationError, quantize_degrees, sample_instance
from .montecarlo import MonteCarloResult, mean_bec_trace, run_montecarlo

__all__ = [
    "ChannelModel", "awgn_entropy", "binary_entropy",
    "DecodeTrace", "bp_decode_bec", "bp_decode_bms", "sample_erasures",
    "NoFrontError", "empirical_speed", "front_positions",
    "CodeInstance", "QuantizationError", "quantize_degrees", "sample_instance",
    "MonteCarloResult", "mean_bec_trace", "run_montecarlo",
]
