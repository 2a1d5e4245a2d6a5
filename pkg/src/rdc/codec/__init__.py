"""Quantization, range coding, bitstream container, and encode/decode pipelines."""

from .bitstream import HEADER_BYTES, Bitstream
from .pipeline import (
    DecodeResult,
    EncodeResult,
    decode_image,
    decode_symbols,
    encode_image,
    image_to_tensor,
    reconstruct_from_symbols,
    tensor_to_image,
)
from .quantize import quantize, symbols_of
from .rangecoder import CdfTable, RangeDecoder, RangeEncoder, range_decode, range_encode
from .tables import GaussianTables, factorized_tables, pmf_to_cdf

__all__ = [
    "Bitstream",
    "CdfTable",
    "DecodeResult",
    "EncodeResult",
    "GaussianTables",
    "HEADER_BYTES",
    "RangeDecoder",
    "RangeEncoder",
    "decode_image",
    "decode_symbols",
    "encode_image",
    "factorized_tables",
    "image_to_tensor",
    "pmf_to_cdf",
    "quantize",
    "range_decode",
    "range_encode",
    "reconstruct_from_symbols",
    "symbols_of",
    "tensor_to_image",
]
