from .view import (
    FUSION_KINDS,
    TAXONOMY,
    FusionInfo,
    build_fusion,
    expected_parameter_count,
    flat_parameters,
    fuse_max,
    fuse_mean,
    fusion_info,
    load_flat_parameters_,
    parameter_segments,
    seed_parameters_,
    ConvFusion,
    MaxPoolFusion,
    MeanFusion,
    MLPFusion,
    SEFusion,
    SharedSEFusion,
    TokenSelfAttention,
    TransformerDecoderFusion,
    TransformerEncoderFusion,
)
from .rgbd import DIRECTIONS, FinalFusion, StageFusion

__all__ = [
    "FUSION_KINDS",
    "TAXONOMY",
    "DIRECTIONS",
    "FusionInfo",
    "build_fusion",
    "expected_parameter_count",
    "flat_parameters",
    "fuse_max",
    "fuse_mean",
    "fusion_info",
    "load_flat_parameters_",
    "parameter_segments",
    "seed_parameters_",
    "ConvFusion",
    "MaxPoolFusion",
    "MeanFusion",
    "MLPFusion",
    "SEFusion",
    "SharedSEFusion",
    "TokenSelfAttention",
    "TransformerDecoderFusion",
    "TransformerEncoderFusion",
    "FinalFusion",
    "StageFusion",
]
