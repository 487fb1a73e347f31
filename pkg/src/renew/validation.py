"""Input checks shared by the estimators and the CLI."""

import math
import numbers

import numpy as np

from .exceptions import InvalidQuery


def check_point(x, name="point"):
    p = np.asarray(x, dtype=float).reshape(-1)
    if p.shape != (2,) or not np.isfinite(p).all():
        raise InvalidQuery(f"{name} must be a finite (x, y) pair, got {x!r}")
    return p


def check_probability(p, name="probability"):
    if not (isinstance(p, numbers.Real) and 0.0 < p < 1.0):
        raise InvalidQuery(f"{name} must lie in (0, 1), got {p!r}")
    return float(p)


def check_positive_int(n, name, minimum=1):
    if not isinstance(n, numbers.Integral) or n < minimum:
        raise InvalidQuery(f"{name} must be an integer >= {minimum}, got {n!r}")
    return int(n)


def check_positive(x, name, allow_zero=False):
    ok = isinstance(x, numbers.Real) and math.isfinite(x) and (x >= 0 if allow_zero else x > 0)
    if not ok:
        raise InvalidQuery(f"{name} must be {'>= 0' if allow_zero else '> 0'}, got {x!r}")
    return float(x)


def check_environment(env):
    from .env import Environment

    if not isinstance(env, Environment):
        raise TypeError(f"expected an Environment, got {type(env).__name__}")
    return env
