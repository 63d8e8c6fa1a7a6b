"""Shared configuration, errors, binary layouts, CSV I/O and run manifests."""

from gluenet.common.config import Config, get_config, load_settings
from gluenet.common.errors import GlueNetError

__all__ = ["Config", "GlueNetError", "get_config", "load_settings"]
