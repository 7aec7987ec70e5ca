"""Backend selection for the hot kernels.

The compiled extension is used when it imports; otherwise (or when
``WDRMIN_PURE_PYTHON=1`` is set) the numpy implementations are used.
"""

import os

from . import _kernels_py

if os.environ.get("WDRMIN_PURE_PYTHON") == "1":
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl
    except ImportError:
        _impl = _kernels_py

BACKEND = _impl.BACKEND

ratio_scan = _impl.ratio_scan
violation_scan = _impl.violation_scan
marginal_extremes = _impl.marginal_extremes
table_argmin = _impl.table_argmin
cut_chain = _impl.cut_chain
chol_chain_gain = _impl.chol_chain_gain
jacobi_eigenvalues = _impl.jacobi_eigenvalues
popcounts = _impl.popcounts

python = _kernels_py
try:
    from . import _kernels as compiled
except ImportError:
    compiled = None
