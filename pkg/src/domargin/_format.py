import numpy as np


def fmt(x):
    """Shortest round-trip decimal (at most 17 significant digits).

    Always positional; infinities are written ``inf``/``-inf``; negative
    zero prints as ``0``.
    """
    x = float(x)
    if np.isnan(x):
        return 'nan'
    if np.isinf(x):
        return 'inf' if x > 0 else '-inf'
    return np.format_float_positional(x + 0.0, unique=True, trim='-')
