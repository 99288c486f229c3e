"""Kernel backend selection.

The compiled extension ``_ckernels`` is used when it imports; otherwise the
numpy versions in ``_pykernels`` are used.  Setting ``ECF_TOOLKIT_PURE_PYTHON=1``
forces the fallback.  Both backends expose the same functions.
"""

from __future__ import annotations

import os

from . import _pykernels as python

compiled = None
if not os.environ.get("ECF_TOOLKIT_PURE_PYTHON"):
    try:
        from . import _ckernels as compiled
    except ImportError:  # extension not built
        compiled = None

_impl = compiled if compiled is not None else python
BACKEND: str = _impl.BACKEND

tau_direct = _impl.tau_direct
tau_mobius = _impl.tau_mobius
subset_zeta = _impl.subset_zeta
subset_max = _impl.subset_max
maxlinear_apply = _impl.maxlinear_apply
vertex_candidates = _impl.vertex_candidates


def available() -> dict:
    """Backends importable in this process, by name."""
    out = {"python": python}
    if compiled is not None:
        out["compiled"] = compiled
    return out
