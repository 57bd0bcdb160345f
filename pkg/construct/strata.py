import logging

import numpy as np
from django.conf import settings

from ridge_core.rng import make_rng
from spectral import arcs
from spectral.sampling import draw_atoms

from .models import ParameterPartition, PieceTable, StratifiedPlan, StratumSamplingError

logger = logging.getLogger(__name__)

MODES = ('signed', 'fractional')
MASS_STREAM = 11
ALLOCATION_STREAM = 12
STRATUM_STREAM = 13


def partition_parameters(d, s, eps):
    """Partition of the atom parameters into cells of sup-distance diameter < eps."""
    if not eps > 0:
        raise ValueError(f"Partition width must be positive, got {eps}.")
    return ParameterPartition(d=d, s=s, eps=float(eps))


def default_epsilon(m, d, mode):
    """m^(-1/(d+2)) for signed allocation, m^(-1/d) for fractional allocation."""
    if mode == 'signed':
        return m ** (-1.0 / (d + 2))
    return m ** (-1.0 / d)


def exact_pieces(rep, partition):
    """
    Split every (frequency, z) pair's t-range at the bin edges and at the
    zeros of its trig factor, and attach the closed-form mass of each piece.
    """
    pairs = rep.pairs
    edges = np.arange(1, partition.bins) * partition.bin_width
    edges = edges[edges < 1.0]
    columns = {name: [] for name in ('pair', 'left', 'right', 'mass', 'sign', 'key')}
    for p in range(len(pairs)):
        rate, offset = pairs.rate[p], pairs.offset[p]
        cuts = np.union1d(edges, arcs.zeros_in_unit_interval(rate, offset))
        bounds = np.concatenate([[0.0], cuts, [1.0]])
        left, right = bounds[:-1], bounds[1:]
        mass = pairs.spectral_weight[p] * np.diff(arcs.abs_cdf(bounds, rate, offset))
        middle = 0.5 * (left + right)
        sign = arcs.eta(middle, rate, pairs.z[p], pairs.phase[p], rep.s)
        columns['pair'].append(np.full(left.size, p))
        columns['left'].append(left)
        columns['right'].append(right)
        columns['mass'].append(mass)
        columns['sign'].append(sign)
        columns['key'].append(partition.locate(sign, middle, np.tile(pairs.directions[p], (left.size, 1))))
    table = {name: np.concatenate(parts) if parts else np.zeros(0) for name, parts in columns.items()}
    keep = table['mass'] > 0
    order = np.argsort(table['key'][keep], kind='stable')
    return PieceTable(**{name: values[keep][order] for name, values in table.items()})


def exact_plan(rep, partition):
    """Stratum masses integrated in closed form over each stratum's pieces."""
    pieces = exact_pieces(rep, partition)
    if not len(pieces):
        raise ValueError("Representation has no mass to stratify.")
    keys, inverse = np.unique(pieces.key, return_inverse=True)
    masses = np.bincount(inverse, weights=pieces.mass)
    logger.debug("Exact masses: %d of %d strata carry mass.", keys.size, partition.M)
    return StratifiedPlan(partition=partition, keys=keys, masses=masses / masses.sum(), pieces=pieces)


def estimated_plan(rep, partition, seed):
    """Stratum masses from binning max(N_min, 100 M) draws; empty strata dropped."""
    n = max(settings.RIDGE_MASS_DRAWS_MIN, 100 * partition.M)
    draws = draw_atoms(rep, n, make_rng(seed, MASS_STREAM))
    keys, counts = np.unique(partition.locate(draws.signs, draws.thresholds, draws.weights), return_counts=True)
    logger.debug("Estimated masses from %d draws: %d of %d strata hit.", n, keys.size, partition.M)
    return StratifiedPlan(partition=partition, keys=keys, masses=counts / n)


def allocate(plan, m, mode, seed):
    """
    Draw counts per stratum.

    signed: m_k is mL_k rounded up or down at random with mean mL_k, and
    n_k = m_k + [m_k = 0]. fractional: m_k = mL_k and n_k = ceil(m_k).
    """
    if mode not in MODES:
        raise ValueError(f"Unknown allocation mode {mode!r}.")
    if m < 1:
        raise ValueError(f"Budget must be positive, got {m}.")
    if not plan.is_normalized:
        raise ValueError(f"Stratum masses sum to {plan.masses.sum()}, expected 1.")
    expected = m * plan.masses
    if mode == 'signed':
        floor = np.floor(expected)
        rng = make_rng(seed, ALLOCATION_STREAM)
        allocations = floor + (rng.random(expected.size) < expected - floor)
        sizes = allocations + (allocations == 0)
    else:
        allocations = expected
        sizes = np.maximum(np.ceil(expected), 1)
    logger.debug("Allocated %d draws over %d strata (m=%d, %s).", sizes.sum(), sizes.size, m, mode)
    return plan.with_allocation(mode, m, allocations, sizes.astype(np.int64))


def _conditional_exact(plan, rep, stratum, rng):
    pieces, pairs = plan.pieces, rep.pairs
    cum = np.concatenate([[0.0], np.cumsum(pieces.mass)])
    start = np.searchsorted(pieces.key, plan.keys, side='left')
    stop = np.searchsorted(pieces.key, plan.keys, side='right')
    lo, hi = start[stratum], stop[stratum]
    target = cum[lo] + rng.random(stratum.size) * (cum[hi] - cum[lo])
    piece = np.clip(np.searchsorted(cum, target, side='right') - 1, lo, hi - 1)
    p = pieces.pair[piece]
    left, right = pieces.left[piece], pieces.right[piece]
    rate, offset = pairs.rate[p], pairs.offset[p]
    low_mass = arcs.abs_cdf(left, rate, offset)
    high_mass = arcs.abs_cdf(right, rate, offset)
    mass = low_mass + rng.random(stratum.size) * (high_mass - low_mass)
    t = np.clip(arcs.abs_cdf_inverse(mass, rate, offset), left, right)
    return pieces.sign[piece], t, pairs.directions[p]


def _conditional_rejection(plan, rep, sizes, rng):
    """Rejection against the stratum membership test, at most the retry budget of draws."""
    budget = settings.RIDGE_RETRY_BUDGET
    remaining = sizes.copy()
    if not remaining.any():
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int8), np.zeros(0), np.zeros((0, rep.d))
    kept = []
    attempts = 0
    while remaining.any() and attempts < budget:
        batch = int(min(budget - attempts, max(2 ** 14, 4 * remaining.sum())))
        draws = draw_atoms(rep, batch, rng)
        attempts += batch
        keys = plan.partition.locate(draws.signs, draws.thresholds, draws.weights)
        pos = np.minimum(np.searchsorted(plan.keys, keys), plan.keys.size - 1)
        hit = np.flatnonzero((plan.keys[pos] == keys) & (remaining[pos] > 0))
        order = hit[np.argsort(pos[hit], kind='stable')]
        _, first, counts = np.unique(pos[order], return_index=True, return_counts=True)
        rank = np.arange(order.size) - np.repeat(first, counts)
        take = order[rank < remaining[pos[order]]]
        np.subtract.at(remaining, pos[take], 1)
        kept.append((pos[take], draws.signs[take], draws.thresholds[take], draws.weights[take]))
    if remaining.any():
        stratum_id = int(plan.keys[np.flatnonzero(remaining)[0]])
        logger.warning("Rejection sampling left stratum %d unfilled.", stratum_id)
        raise StratumSamplingError(stratum_id, attempts)
    stratum, signs, t, weights = (np.concatenate(parts) for parts in zip(*kept))
    order = np.argsort(stratum, kind='stable')
    return stratum[order], signs[order], t[order], weights[order]


def sample_plan(plan, rep, seed):
    """
    n_k draws from each stratum's conditional measure, with coefficients
    eta m_k / n_k. Strata with m_k = 0 are skipped in signed mode, where
    their coefficient would be zero.
    """
    if plan.sizes is None:
        raise ValueError("Plan has no allocation.")
    sizes = plan.sizes.copy()
    if plan.mode == 'signed':
        sizes[plan.allocations == 0] = 0
    rng = make_rng(seed, STRATUM_STREAM)
    if plan.pieces is not None:
        stratum = np.repeat(np.arange(sizes.size), sizes)
        signs, t, weights = _conditional_exact(plan, rep, stratum, rng)
    else:
        stratum, signs, t, weights = _conditional_rejection(plan, rep, sizes, rng)
    coefs = signs * (plan.allocations / np.maximum(plan.sizes, 1))[stratum]
    return stratum, coefs, signs, t, weights
