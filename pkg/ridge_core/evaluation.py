import math

import numpy as np
from django.conf import settings

from .models import DimensionMismatch


def relu_power(z, power):
    """(z)_+^power for power 1 or 2."""
    z = np.maximum(z, 0.0)
    return z if power == 1 else z * z


def _as_points(x, d):
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    points = np.atleast_2d(x)
    if points.shape[-1] != d:
        raise DimensionMismatch(f"Point has dimension {points.shape[-1]}, expected {d}.")
    return points, single


def eval_atom(atom, x):
    """eta * (a.x - t)_+^(s-1) at a point (or rows of points) of D."""
    points, single = _as_points(x, atom.d)
    values = atom.sign * relu_power(points @ atom.a - atom.t, atom.s - 1)
    return float(values[0]) if single else values


def polynomial_part(c, points):
    values = c.b0 + points @ c.a0
    if c.A0 is not None:
        values = values + 0.5 * np.einsum('ni,ij,nj->n', points, c.A0, points)
    return values


def eval_combination(c, x):
    points, single = _as_points(x, c.d)
    chunk = settings.RIDGE_EVAL_CHUNK
    values = np.empty(points.shape[0])
    for start in range(0, points.shape[0], chunk):
        block = points[start:start + chunk]
        out = polynomial_part(c, block)
        if c.term_count:
            ridge = relu_power(block @ c.weights.T - c.thresholds, c.s - 1)
            out = out + c.outer_factor * (ridge @ c.coefs)
        values[start:start + chunk] = out
    return float(values[0]) if single else values


def lipschitz_factor(s):
    """Lipschitz constant of (z)_+^(s-1) for z <= 1."""
    return 1.0 if s == 2 else 2.0


def atom_sup_distance(u, w):
    """
    Upper bound on sup over x in D of |u(x) - w(x)|.

    Atoms with different signs get the infinite sentinel;
    otherwise the bound is L (||a_u - a_w||_1 + |t_u - t_w|) with L the
    Lipschitz constant of the activation on [-2, 1].
    """
    if u.s != w.s:
        raise ValueError(f"Atoms have orders {u.s} and {w.s}.")
    if u.d != w.d:
        raise DimensionMismatch(f"Atoms have dimensions {u.d} and {w.d}.")
    if u.sign != w.sign:
        return math.inf
    gap = float(np.abs(u.a - w.a).sum()) + abs(u.t - w.t)
    return lipschitz_factor(u.s) * gap
