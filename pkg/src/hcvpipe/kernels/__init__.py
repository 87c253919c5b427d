"""Hot numeric kernels with backend selection.

Two interchangeable backends live here: numba (@njit loops, the default
when numba imports) and pure numpy. Select explicitly with the
environment variable ``HCVPIPE_BACKEND=numba|numpy``; anything else, or a
missing numba install, silently selects numpy.

``benchmarks/bench_kernels.py`` at the repository root times one backend
against the other.
"""

import os

_choice = os.environ.get("HCVPIPE_BACKEND", "").strip().lower()

if _choice == "numpy":
    from . import numpy_backend as _backend
else:
    try:
        from . import numba_backend as _backend
    except ImportError:
        if _choice == "numba":
            raise
        from . import numpy_backend as _backend

smo_solve = _backend.smo_solve
mlp_train = _backend.mlp_train
jacobi_eigh = _backend.jacobi_eigh
best_split_scan = _backend.best_split_scan
grow_tree_arrays = _backend.grow_tree_arrays
tree_predict = _backend.tree_predict
forest_vote_counts = _backend.forest_vote_counts


def backend_name():
    """Name of the active kernel backend ("numba" or "numpy")."""
    return _backend.NAME
