"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the NumPy
implementation takes over. Setting ``MITBENCH_PURE_PYTHON=1`` forces the
fallback, which the equivalence tests and the kernel benchmark rely on.
"""

import os

from . import _kernels_py

BACKEND = "python"

if os.environ.get("MITBENCH_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl

        BACKEND = "compiled"
    except ImportError:  # extension not built
        _impl = _kernels_py
else:
    _impl = _kernels_py

sv_apply = _impl.sv_apply
dm_apply_unitary = _impl.dm_apply_unitary
dm_depolarize = _impl.dm_depolarize
dm_thermal = _impl.dm_thermal


def implementations():
    """Return ``{name: module}`` for every kernel implementation available here."""
    impls = {"python": _kernels_py}
    try:
        from . import _kernels

        impls["compiled"] = _kernels
    except ImportError:
        pass
    return impls
