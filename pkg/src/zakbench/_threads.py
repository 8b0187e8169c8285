"""Thread-cap plumbing applied before any numerical import.

``ZAKBENCH_THREADS`` caps BLAS/LAPACK parallelism.  The cap only works if
the environment variables are set before numpy loads, so the package
``__init__`` calls :func:`apply_thread_cap` before importing anything that
depends on numpy.  Malformed values are ignored here (import must not
fail); the CLI validates them separately and reports a proper error.
"""

import os
from typing import Optional

THREAD_VARS = (
    "OMP_NUM_THREADS",
    "OPENBLAS_NUM_THREADS",
    "MKL_NUM_THREADS",
    "NUMEXPR_NUM_THREADS",
    "VECLIB_MAXIMUM_THREADS",
)


def apply_thread_cap() -> Optional[str]:
    cap = os.environ.get("ZAKBENCH_THREADS")
    if cap and cap.isdigit() and int(cap) >= 1:
        for var in THREAD_VARS:
            os.environ[var] = cap
        return cap
    return None
