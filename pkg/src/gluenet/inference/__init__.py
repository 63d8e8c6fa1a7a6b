"""Inference-time operators: top-K fusion, dissimilarity maps, guidance."""

from gluenet.inference.dissimilarity import dissimilarity_map
from gluenet.inference.fusion import FusionParams, fuse_stores, topk_fuse
from gluenet.inference.guidance import GuidanceParams, guidance_combine

__all__ = [
    "FusionParams",
    "GuidanceParams",
    "dissimilarity_map",
    "fuse_stores",
    "guidance_combine",
    "topk_fuse",
]
