"""Stochastic affine erasure-correcting code and its building blocks."""

from .code import (
    ControlInfo,
    EncoderTrace,
    SaEccParams,
    StochasticAffineView,
    affine_view,
    ambiguity_failure,
    clopper_pearson_lower,
    clopper_pearson_upper,
    decode_coset,
    default_block_len,
    draw_control,
    draw_trace,
    encode_with_trace,
    erasure_patterns,
    make_saecc_params,
    measure_delta,
    payload_layout,
    received_arrays,
    sa_decode,
    sa_encode,
)
from .control import (
    AmdCode,
    ControlBlockCodec,
    RSControlCodec,
    control_block_codec,
    rs_control_codec,
)
from .generators import Permutation, knr_permutation, polyt_mask, sample_block_positions
from .rec import RandomErasureCode, hidden_pattern_count, rec_codec

__all__ = [
    "AmdCode",
    "ControlBlockCodec",
    "ControlInfo",
    "EncoderTrace",
    "Permutation",
    "RSControlCodec",
    "RandomErasureCode",
    "SaEccParams",
    "StochasticAffineView",
    "affine_view",
    "ambiguity_failure",
    "clopper_pearson_lower",
    "clopper_pearson_upper",
    "control_block_codec",
    "decode_coset",
    "default_block_len",
    "draw_control",
    "draw_trace",
    "encode_with_trace",
    "erasure_patterns",
    "hidden_pattern_count",
    "knr_permutation",
    "make_saecc_params",
    "measure_delta",
    "payload_layout",
    "polyt_mask",
    "received_arrays",
    "rec_codec",
    "rs_control_codec",
    "sa_decode",
    "sa_encode",
    "sample_block_positions",
]
