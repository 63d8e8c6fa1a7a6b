"""GlueNet - feature-space alignment toolkit for condition-encoder embeddings."""

__version__ = "0.3.0"
