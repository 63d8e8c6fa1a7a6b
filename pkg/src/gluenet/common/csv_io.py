"""
CSV I/O utilities for GlueNet.

Loss logs, projections and dissimilarity maps are written through pandas
with a fixed float format so that equal inputs give byte-equal files.
"""
from __future__ import annotations

import logging
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np
import pandas as pd

from gluenet.common.config import get_config
from gluenet.common.errors import DimensionError

log = logging.getLogger(__name__)


def float_format(digits: Optional[int] = None) -> str:
    digits = get_config().get_csv_digits() if digits is None else digits
    return f"%.{digits}g"


def write_frame(df: pd.DataFrame, path: Path, digits: Optional[int] = None) -> None:
    """Write a DataFrame without index, creating parent directories."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(path, index=False, float_format=float_format(digits), lineterminator="\n")
    log.info(f"Wrote {len(df)} rows to {path}")


def write_rows(rows: Iterable[dict], columns: Sequence[str], path: Path) -> None:
    """Rows as dicts keyed by ``columns``; an empty iterable writes the header only."""
    df = pd.DataFrame(list(rows), columns=list(columns))
    write_frame(df, path)


def write_matrix(matrix: np.ndarray, path: Path) -> None:
    """Square matrix with integer column headers 0..n-1."""
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2:
        raise DimensionError(f"expected a matrix, got shape {matrix.shape}")
    df = pd.DataFrame(matrix, columns=[str(i) for i in range(matrix.shape[1])])
    write_frame(df, path)


def read_frame(path: Path) -> pd.DataFrame:
    return pd.read_csv(Path(path))
