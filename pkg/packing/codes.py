import itertools
import logging
import math

import numpy as np
from django.conf import settings

from ridge_core.quadrature import tensor_gauss_legendre
from ridge_core.rng import make_rng

from .models import PackingSet, SineFamily

logger = logging.getLogger(__name__)

CODEWORD_STREAM = 41
MAX_FAMILY_SIZE = 10 ** 6


def binary_entropy(p):
    if p in (0, 1):
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


ENTROPY_QUARTER = binary_entropy(0.25)


def sine_family(R, d):
    if R < 1 or d < 1:
        raise ValueError(f"Family needs R >= 1 and d >= 1, got R={R}, d={d}.")
    if R ** d > MAX_FAMILY_SIZE:
        raise ValueError(f"Family of R^d = {R ** d} members exceeds {MAX_FAMILY_SIZE}.")
    thetas = list(itertools.product(range(1, R + 1), repeat=d))
    return SineFamily(R=R, d=d, thetas=thetas)


def sine_family_gram(fam, nodes=None):
    points, weights = tensor_gauss_legendre(nodes or 16 * fam.R + 16, fam.d)
    values = fam.evaluate(points)
    return values.T @ (values * weights[:, None])


def pairwise_distance(fam, omega, other):
    """(1/|H|) sqrt(sum_h (w_h - w'_h)^2 ||h||^2), exact by orthogonality."""
    omega, other = np.asarray(omega, dtype=float), np.asarray(other, dtype=float)
    if omega.shape != (len(fam),) or other.shape != (len(fam),):
        raise ValueError(f"Codewords must have length {len(fam)}.")
    return math.sqrt(float((omega - other) ** 2 @ fam.norms ** 2)) / len(fam)


def separation_bound(fam):
    """(1/2) min ||h|| / sqrt(|H|); the inner-product defect is zero for the sine family."""
    return 0.5 * fam.min_norm / math.sqrt(len(fam))


def gilbert_varshamov_target(size):
    """ceil(2^((1 - H(1/4)) |H| - 1))."""
    return math.ceil(2 ** ((1 - ENTROPY_QUARTER) * size - 1))


def select_packing(fam, target_size=None, seed=0, trials=None):
    size = len(fam)
    if size < 3:
        raise ValueError(f"Packing needs at least 3 family members, got {size}.")
    target_size = gilbert_varshamov_target(size) if target_size is None else target_size
    if target_size < 2:
        raise ValueError(f"Target size must be at least 2, got {target_size}.")
    trials = trials or settings.RIDGE_PACKING_TRIALS
    bound = separation_bound(fam)
    rng = make_rng(seed, CODEWORD_STREAM)
    accepted = [rng.integers(0, 2, size=size)]
    used = 1
    while len(accepted) < target_size and used < trials:
        candidate = rng.integers(0, 2, size=size)
        used += 1
        # on garde le mot seulement s'il est assez loin de tous les autres
        if all(pairwise_distance(fam, kept, candidate) >= bound for kept in accepted):
            accepted.append(candidate)
    codewords = np.array(accepted)
    if len(codewords) < target_size:
        logger.warning("Greedy packing reached %d of %d codewords in %d trials.", len(codewords), target_size, used)
    return PackingSet(
        family=fam, codewords=codewords, min_distance=min_pairwise_distance(fam, codewords),
        separation_bound=bound, target_size=target_size, trials=used,
    )


def min_pairwise_distance(fam, codewords):
    if len(codewords) < 2:
        return math.inf
    return min(pairwise_distance(fam, u, w) for u, w in itertools.combinations(codewords, 2))


def packing_lower_curve(eps, d):
    """
    ln 2 (1 - H(1/4)) (8 eps sqrt(2) pi d^2)^(-2d/(4+d)) - 1, a lower bound
    on the log packing number at scale eps (natural log).
    """
    if eps <= 0:
        raise ValueError(f"Scale must be positive, got {eps}.")
    base = 8 * eps * math.sqrt(2) * math.pi * d ** 2
    return math.log(2) * (1 - ENTROPY_QUARTER) * base ** (-2 * d / (4 + d)) - 1


def packing_scale(R, d):
    """eps = 1 / (8 sqrt(2) pi d^2 R^(2 + d/2)), where the curve equals the |H|-based count."""
    return 1 / (8 * math.sqrt(2) * math.pi * d ** 2 * R ** (2 + d / 2))
