# src/gluenet/paths.py
"""
Path definitions for GlueNet.

Bundled configurations ship in configs/ at the repository root.
"""

from pathlib import Path

PROJECT_ROOT = Path(__file__).resolve().parent.parent.parent
CONFIGS_ROOT = PROJECT_ROOT / "configs"

# Bundled GlueNet configurations
GLUENET_3RM_CONFIG = CONFIGS_ROOT / "gluenet-3rm-77x1024.yaml"
GLUENET_5RM_CONFIG = CONFIGS_ROOT / "gluenet-5rm-77x1024.yaml"
GLUENET_5RM_128_CONFIG = CONFIGS_ROOT / "gluenet-5rm-128to77x1024.yaml"
GLUENET_5RM_256_CONFIG = CONFIGS_ROOT / "gluenet-5rm-256to77x1024.yaml"
GLUENET_TINY_CONFIG = CONFIGS_ROOT / "gluenet-tiny-8x16.yaml"

# Output layout inside a training --out-dir
LOSS_CSV_NAME = "losses.csv"
FINAL_CHECKPOINT_NAME = "model.ggck"
CHECKPOINT_DIR_NAME = "checkpoints"


def checkpoint_path(out_dir: Path, step: int) -> Path:
    """Scheduled checkpoint location for a given optimizer step."""
    return Path(out_dir) / CHECKPOINT_DIR_NAME / f"step_{step:06d}.ggck"


__all__ = [
    "PROJECT_ROOT",
    "CONFIGS_ROOT",
    "GLUENET_3RM_CONFIG",
    "GLUENET_5RM_CONFIG",
    "GLUENET_5RM_128_CONFIG",
    "GLUENET_5RM_256_CONFIG",
    "GLUENET_TINY_CONFIG",
    "LOSS_CSV_NAME",
    "FINAL_CHECKPOINT_NAME",
    "CHECKPOINT_DIR_NAME",
    "checkpoint_path",
]
