"""Feature-space inspection: projections, separation and CSV exports."""

from gluenet.diagnostics.checks import check_store
from gluenet.diagnostics.export import export_dissimilarity_csv, export_projection_csv
from gluenet.diagnostics.projection import (
    ProjectionResult,
    pair_separation_ratio,
    pca_project,
    power_directions,
)

__all__ = [
    "ProjectionResult",
    "check_store",
    "export_dissimilarity_csv",
    "export_projection_csv",
    "pair_separation_ratio",
    "pca_project",
    "power_directions",
]
