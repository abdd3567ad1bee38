"""SELD dataset synthesis, feature extraction and evaluation."""

from ._core import (
    SeldError,
    anechoic_ir,
    angular_distance,
    decode_accdoa,
    degrade,
    doa_to_unit_vector,
    encode_accdoa,
    evaluate,
    extract_features,
    make_banks,
    rank,
    read_metadata,
    read_wav,
    real_sh,
    render_static,
    synthesize,
    unit_vector_to_doa,
    write_metadata,
    write_wav,
)

__all__ = [
    "SeldError",
    "anechoic_ir",
    "angular_distance",
    "decode_accdoa",
    "degrade",
    "doa_to_unit_vector",
    "encode_accdoa",
    "evaluate",
    "extract_features",
    "make_banks",
    "rank",
    "read_metadata",
    "read_wav",
    "real_sh",
    "render_static",
    "synthesize",
    "unit_vector_to_doa",
    "write_metadata",
    "write_wav",
]
