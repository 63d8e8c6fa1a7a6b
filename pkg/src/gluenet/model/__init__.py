"""GlueNet encoder, decoder and discriminator."""

from gluenet.model.config import GlueNetConfig
from gluenet.model.discriminator import Discriminator, build_discriminator, forward_discriminator
from gluenet.model.gluenet import (
    GlueNetDecoder,
    GlueNetEncoder,
    build_decoder,
    build_encoder,
    forward_decoder,
    forward_encoder,
    param_count,
)
from gluenet.model.mixer import mixer_block

__all__ = [
    "GlueNetConfig",
    "GlueNetEncoder",
    "GlueNetDecoder",
    "Discriminator",
    "build_encoder",
    "build_decoder",
    "build_discriminator",
    "forward_encoder",
    "forward_decoder",
    "forward_discriminator",
    "mixer_block",
    "param_count",
]
