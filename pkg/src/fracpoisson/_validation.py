"""Small argument checks shared by the modules."""

import math


def check_positive(x, name):
    if not (isinstance(x, (int, float)) or hasattr(x, "__float__")) or not float(x) > 0:
        raise ValueError(f"{name} must be positive, got {x!r}")
    if not math.isfinite(float(x)):
        raise ValueError(f"{name} must be finite, got {x!r}")
    return float(x)


def check_alpha(alpha):
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    return alpha


def check_finite(x, name):
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"{name} must be finite, got {x}")
    return x
