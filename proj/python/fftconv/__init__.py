# SPDX-License-Identifier: Apache-2.0
"""Frequency-domain convolution engine for BDHW float32 tensors."""

from ._fftconv import (
    DimensionError,
    Error,
    FormatError,
    LayoutError,
    ParseError,
    PlanError,
    UnsupportedSizeError,
    accgrad,
    best_tile_size,
    bprop,
    flop_count,
    fprop,
    irfft2,
    rfft2,
    smooth_sizes,
    tune,
)

__all__ = [
    "DimensionError",
    "Error",
    "FormatError",
    "LayoutError",
    "ParseError",
    "PlanError",
    "UnsupportedSizeError",
    "accgrad",
    "best_tile_size",
    "bprop",
    "flop_count",
    "fprop",
    "irfft2",
    "rfft2",
    "smooth_sizes",
    "tune",
]
