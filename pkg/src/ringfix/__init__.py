"""Ring artifact removal for fan-beam CT via dual-domain regularization.

The package simulates fan-beam scans with per-detector, per-view
response errors, removes the resulting sinogram stripes / image rings by
jointly estimating the reconstruction and a compensation-offset matrix,
and scores artifact suppression against ground truth.
"""

import os

from .errors import DimensionError, NumericalError, ValidationError
from .geometry import (
    FanBeamGeometry,
    back_project,
    desk_geometry,
    forward_project,
    full_scale_geometry,
    row_column_sums,
)

__version__ = "0.1.0"


def set_thread_cap(threads: int) -> None:
    """Cap internal parallelism; 0 restores the automatic default."""
    import numba

    if threads < 0:
        raise ValidationError(f"thread cap must be >= 0, got {threads}")
    if threads == 0:
        numba.set_num_threads(numba.config.NUMBA_DEFAULT_NUM_THREADS)
    else:
        numba.set_num_threads(min(threads, numba.config.NUMBA_DEFAULT_NUM_THREADS))


_env_threads = os.environ.get("RINGFIX_THREADS")
if _env_threads:
    try:
        set_thread_cap(int(_env_threads))
    except ValueError:
        raise ValidationError(
            f"RINGFIX_THREADS must be an integer, got {_env_threads!r}"
        ) from None
