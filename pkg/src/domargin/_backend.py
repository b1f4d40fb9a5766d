"""Select the compiled kernels when available, else the pure-Python ones.

Set ``DOMARGIN_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _purepy

BACKEND = 'python'
rk4_lure = _purepy.rk4_lure
polygon_winding = _purepy.polygon_winding

if not os.environ.get('DOMARGIN_PURE_PYTHON'):
    try:
        from . import _kernels
    except ImportError:  # extension not built
        pass
    else:
        BACKEND = 'cython'
        rk4_lure = _kernels.rk4_lure
        polygon_winding = _kernels.polygon_winding
