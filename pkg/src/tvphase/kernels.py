"""Projection kernel selection.

The compiled kernel (tvphase._cd, Cython) is used when the extension built;
otherwise the numpy red/black implementation takes over.  Set
``TVPHASE_KERNEL`` to ``cython`` or ``python`` to force a backend (``auto``
or unset picks the fastest available); forcing an unavailable backend raises
at import.
"""

import os

_requested = os.environ.get("TVPHASE_KERNEL", "auto").strip().lower() or "auto"

if _requested == "auto":
    try:
        from ._cd import cd_sweeps

        BACKEND = "cython"
    except ImportError:
        from ._cd_py import cd_sweeps

        BACKEND = "python"
elif _requested == "cython":
    from ._cd import cd_sweeps

    BACKEND = "cython"
elif _requested == "python":
    from ._cd_py import cd_sweeps

    BACKEND = "python"
else:
    raise ImportError(
        f"TVPHASE_KERNEL={_requested!r} not recognized; use auto, cython, or python"
    )

__all__ = ["cd_sweeps", "BACKEND"]
