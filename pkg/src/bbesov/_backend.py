"""Select the compiled series core if available, else the numpy fallback.

Set BBESOV_FORCE_FALLBACK=1 to force the pure-python path (used by the
benchmark and by tests that compare the two implementations).
"""

import os

if os.environ.get("BBESOV_FORCE_FALLBACK") == "1":
    from . import _series_py as _impl
else:
    try:
        from . import _ext as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _series_py as _impl

BACKEND = _impl.BACKEND
zonal_series = _impl.zonal_series
