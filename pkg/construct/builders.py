import logging

import numpy as np

from ridge_core.models import NORM_TOL, DimensionMismatch, RidgeCombination
from ridge_core.rng import make_rng
from spectral.sampling import draw_atoms

from .models import SparsifierConfig
from .strata import (
    allocate, default_epsilon, estimated_plan, exact_plan, partition_parameters, sample_plan,
)

logger = logging.getLogger(__name__)

IID_STREAM = 21
SPARSIFY_STREAM = 22
MASS_METHODS = ('exact', 'estimated')


def _check(rep, target, m):
    if rep.d != target.d:
        raise DimensionMismatch(f"Representation has dimension {rep.d}, target has {target.d}.")
    if int(m) != m or m < 1:
        raise ValueError(f"Number of terms must be a positive integer, got {m}.")


def _combination(rep, target, m, coefs, signs, thresholds, weights):
    """Attach the target's Taylor part to sampled terms with outer normalizer m."""
    return RidgeCombination(
        d=rep.d, s=rep.s, b0=target.b0, a0=target.a0,
        A0=target.A0 if rep.s == 3 else None,
        v=rep.v, m=m,
        coefs=coefs, signs=signs, thresholds=thresholds, weights=np.reshape(weights, (-1, rep.d)),
    )


def build_iid(rep, m, target, seed=None):
    """b0 + a0.x (+ x'A0x/2) + v/((s-1)! m) sum of m i.i.d. atoms."""
    _check(rep, target, m)
    seed = rep.seed if seed is None else seed
    if rep.v == 0:
        return _combination(rep, target, m, [], [], [], [])
    draws = draw_atoms(rep, m, make_rng(seed, IID_STREAM))
    return _combination(rep, target, m, draws.coefs, draws.signs, draws.thresholds, draws.weights)


def build_stratified(rep, m, eps, mode, target, seed=None, masses='exact'):
    """
    Proportionate stratified sampling over a partition of width ``eps``.

    Term k of stratum j gets coefficient eta m_j / n_j and the outer
    normalizer stays the budget m, so the combination is unbiased with at
    most m + M terms.
    """
    _check(rep, target, m)
    if not rep.signed:
        raise ValueError("Stratified building needs a sign-valued representation.")
    if masses not in MASS_METHODS:
        raise ValueError(f"Unknown mass method {masses!r}.")
    seed = rep.seed if seed is None else seed
    partition = partition_parameters(rep.d, rep.s, eps)
    if rep.v == 0:
        return _combination(rep, target, m, [], [], [], [])
    plan = exact_plan(rep, partition) if masses == 'exact' else estimated_plan(rep, partition, seed)
    plan = allocate(plan, m, mode, seed)
    _, coefs, signs, thresholds, weights = sample_plan(plan, rep, seed)
    logger.info(
        "Stratified build: m=%d eps=%.4g M=%d strata=%d terms=%d.",
        m, eps, plan.M, plan.keys.size, coefs.size,
    )
    return _combination(rep, target, m, coefs, signs, thresholds, weights)


def sparsify(c, cfg):
    """
    Replace each inner vector a_k by the mean of m0 signed basis vectors
    drawn with P[sgn(a_k(j)) e_j] = |a_k(j)|. Every other field is kept
    bit for bit.
    """
    if not isinstance(cfg, SparsifierConfig):
        cfg = SparsifierConfig(**cfg)
    if not c.term_count:
        return c
    norms = np.abs(c.weights).sum(axis=1)
    if np.any(np.abs(norms - 1.0) > NORM_TOL):
        raise ValueError("Sparsification needs inner vectors of unit l1 norm.")
    rng = make_rng(cfg.seed, SPARSIFY_STREAM)
    counts = rng.multinomial(cfg.m0, np.abs(c.weights) / norms[:, None])
    return c.replace_weights(counts * np.sign(c.weights) / cfg.m0)


def build_sparse(rep, m, m0, target, seed=None):
    # même seed pour le tirage et la sparsification
    seed = rep.seed if seed is None else seed
    return sparsify(build_iid(rep, m, target, seed), SparsifierConfig(m0=m0, seed=seed))


def build(rep, target, method, m, seed=None, eps=None, mode='fractional', m0=None, masses='exact'):
    if method == 'iid':
        return build_iid(rep, m, target, seed)
    if method == 'stratified':
        eps = default_epsilon(m, rep.d, mode) if eps is None else eps
        return build_stratified(rep, m, eps, mode, target, seed, masses)
    if method == 'sparse':
        if m0 is None:
            raise ValueError("The sparse builder needs an inner sparsity budget m0.")
        return build_sparse(rep, m, m0, target, seed)
    raise ValueError(f"Unknown builder {method!r}.")
