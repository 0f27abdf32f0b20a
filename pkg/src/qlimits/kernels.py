"""Backend selection for the hot loops.

The compiled extension is used when it imports; set ``QLIMITS_PURE_PYTHON=1``
to force the numpy fallback. ``BACKEND`` names the active choice.
"""

import os

from . import _pykernels

BACKENDS = {"python": _pykernels}

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None
else:
    BACKENDS["compiled"] = _ckernels

if _ckernels is not None and os.environ.get("QLIMITS_PURE_PYTHON", "") in ("", "0"):
    BACKEND = "compiled"
else:
    BACKEND = "python"

_active = BACKENDS[BACKEND]

horner_1d = _active.horner_1d
horner_2d = _active.horner_2d
ks_sweep = _active.ks_sweep


def get_backend(name=None):
    """Return the kernel module called ``name`` (default: the active one)."""
    if name is None:
        return _active
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"backend {name!r} unavailable; have {sorted(BACKENDS)}") from None
