"""
CSV exports of diagnostics.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np
import pandas as pd

from gluenet.common.csv_io import write_frame, write_matrix
from gluenet.common.errors import DimensionError
from gluenet.diagnostics.projection import ProjectionResult

PROJECTION_COLUMNS = ("x", "y", "label")


def projection_frame(result: ProjectionResult) -> pd.DataFrame:
    return pd.DataFrame({
        "x": result.points[:, 0],
        "y": result.points[:, 1],
        "label": result.labels,
    }, columns=list(PROJECTION_COLUMNS))


def export_projection_csv(result: ProjectionResult, path: Path) -> None:
    """``x,y,label`` with one row per projected record."""
    write_frame(projection_frame(result), path)


def export_dissimilarity_csv(dissimilarity: np.ndarray, path: Path) -> None:
    """L rows of L columns, headed by the token indices."""
    dissimilarity = np.asarray(dissimilarity)
    if dissimilarity.ndim != 2 or dissimilarity.shape[0] != dissimilarity.shape[1]:
        raise DimensionError(f"dissimilarity map must be square, got shape {dissimilarity.shape}")
    write_matrix(dissimilarity, path)
