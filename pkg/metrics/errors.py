import itertools
import logging
import math

import numpy as np
from django.conf import settings
from scipy import stats
from scipy.stats import qmc

from ridge_core.evaluation import eval_combination
from ridge_core.models import DimensionMismatch
from ridge_core.quadrature import tensor_gauss_legendre
from ridge_core.rng import make_rng

from .models import ErrorReport, RateFit

logger = logging.getLogger(__name__)

TENSOR_MAX_DIM = 3
LINF_STREAM = 31
SOBOL_SEED = 0
TERNARY_STEPS = 40


def _check(target, c):
    if target.d != c.d:
        raise DimensionMismatch(f"Target has dimension {target.d}, combination has {c.d}.")


def _deviation(target, c, points):
    return np.abs(target(points) - eval_combination(c, points))


def l2_nodes(d, nodes=None):
    """
    Points and probability weights for L2 on D: tensor Gauss-Legendre for
    d <= 3, a Sobol' set of RIDGE_QMC_POINTS points otherwise.
    """
    if d <= TENSOR_MAX_DIM:
        return tensor_gauss_legendre(nodes or settings.RIDGE_QUADRATURE_NODES, d)
    sobol = qmc.Sobol(d, scramble=True, seed=SOBOL_SEED)
    points = 2.0 * sobol.random_base2(int(math.log2(settings.RIDGE_QMC_POINTS))) - 1.0
    return points, np.full(points.shape[0], 1.0 / points.shape[0])


def _l2_and_node_max(target, c, nodes=None):
    points, weights = l2_nodes(c.d, nodes)
    deviation = _deviation(target, c, points)
    return math.sqrt(float(weights @ deviation ** 2)), float(deviation.max())


def l2_error(target, c, nodes=None):
    _check(target, c)
    return _l2_and_node_max(target, c, nodes)[0]


def _grid(d, resolution):
    axis = np.linspace(-1.0, 1.0, resolution)
    return np.array(list(itertools.product(axis, repeat=d)))


def _refine(target, c, starts, radius):
    """Coordinate-wise ternary search of |f - c| in a box of half-width ``radius`` around each start."""
    best = starts.copy()
    best_value = _deviation(target, c, best)
    for axis in range(c.d):
        lo = np.maximum(best[:, axis] - radius, -1.0)
        hi = np.minimum(best[:, axis] + radius, 1.0)
        for _ in range(TERNARY_STEPS):
            left, right = best.copy(), best.copy()
            left[:, axis] = lo + (hi - lo) / 3
            right[:, axis] = hi - (hi - lo) / 3
            left_value = _deviation(target, c, left)
            right_value = _deviation(target, c, right)
            keep_left = left_value >= right_value
            hi = np.where(keep_left, right[:, axis], hi)
            lo = np.where(keep_left, lo, left[:, axis])
            candidate = np.where(keep_left[:, None], left, right)
            candidate_value = np.maximum(left_value, right_value)
            improved = candidate_value > best_value
            best[improved] = candidate[improved]
            best_value = np.where(improved, candidate_value, best_value)
    return float(best_value.max())


def linf_error(target, c, resolution=None):
    """
    Grid maximum of |f - c|, refined by ternary search around the top cells.

    The result never falls below the grid maximum and is a lower bound on
    the true sup.
    """
    _check(target, c)
    d = c.d
    table = settings.RIDGE_LINF_RESOLUTION
    resolution = resolution or table.get(d, table[max(table)])
    points = _grid(d, resolution)
    if d > TENSOR_MAX_DIM:
        rng = make_rng(0, LINF_STREAM)
        points = np.vstack([points, rng.uniform(-1.0, 1.0, size=(settings.RIDGE_LINF_RANDOM_POINTS, d))])
    deviation = _deviation(target, c, points)
    top = np.argsort(deviation)[-settings.RIDGE_LINF_REFINE_CELLS:]
    refined = _refine(target, c, points[top], 2.0 / (resolution - 1))
    return max(float(deviation.max()), refined)


def measure(target, c, m=None, method='', seed=0, nodes=None, resolution=None):
    """
    L2 and sup errors together. The sup is also taken over the L2 nodes,
    so l2 <= linf always holds.
    """
    _check(target, c)
    l2, node_max = _l2_and_node_max(target, c, nodes)
    linf = max(linf_error(target, c, resolution), node_max)
    return ErrorReport(
        m=c.term_count if m is None else m, method=method, seed=seed, l2=l2, linf=linf,
        term_count=c.term_count, inner_sparsity_max=c.inner_sparsity_max,
    )


def fit_rate(points):
    """Least squares of log error on log m; nonpositive errors are dropped."""
    points = [(float(m), float(err)) for m, err in points]
    kept = [(m, err) for m, err in points if err > 0 and math.isfinite(err)]
    if len(kept) < len(points):
        logger.warning("Dropped %d nonpositive errors from rate fit.", len(points) - len(kept))
    if len(kept) < 3:
        raise ValueError(f"Rate fit needs at least 3 positive errors, got {len(kept)}.")
    if len({m for m, _ in kept}) < len(kept):
        raise ValueError("Rate fit needs distinct m values.")
    log_m = np.log([m for m, _ in kept])
    log_err = np.log([err for _, err in kept])
    if np.ptp(log_err) == 0:
        return RateFit(points=tuple(kept), slope=0.0, intercept=float(log_err[0]), r2=1.0)
    result = stats.linregress(log_m, log_err)
    return RateFit(
        points=tuple(kept), slope=float(result.slope),
        intercept=float(result.intercept), r2=float(result.rvalue ** 2),
    )


def lower_bound_floor(m, d, s, A=1.0):
    """(A m d^(2s+1) log(md))^(-1/2 - s/d)."""
    if m < 2:
        raise ValueError(f"Floor needs m >= 2, got {m}.")
    if A <= 0:
        raise ValueError(f"Floor constant must be positive, got {A}.")
    return (A * m * d ** (2 * s + 1) * math.log(m * d)) ** (-0.5 - s / d)
