"""Verification suites run by the verify command; each returns a list of Check results."""
import itertools
import math

import numpy as np
from scipy import integrate, stats

from packing.codes import (
    ENTROPY_QUARTER, packing_lower_curve, packing_scale, select_packing, sine_family,
    sine_family_gram,
)
from ridge_core.rng import make_rng
from spectral import arcs
from spectral.catalog import cosine_pair_measure, sine_ridge_target
from spectral.identities import verify_ramp_identity, verify_square_identity
from spectral.sampling import (
    exact_sine_representation, represented_by_quadrature, residual, sample_atom,
    spectral_representation,
)

from .models import at_least, at_most

IDENTITY_STREAM = 51
IDENTITY_TOL = 1e-8
IDENTITY_DRAWS = 100
GRAM_TOL = 1e-8
ABS_SINE_TOL = 1e-10
FIDELITY_TOL = 1e-6
FIDELITY_GRID = 101
CURVE_TOL = 1e-9
SAMPLER_DRAWS = 10 ** 5
SAMPLER_BINS = 20
SAMPLER_MIN_PVALUE = 0.01
PACKING_MIN_SIZE = 4


def identity_checks(seed=0):
    """Both identities at random inputs with |z| <= c <= 4, d <= 3 and ||w||_1 <= 4 pi."""
    rng = make_rng(seed, IDENTITY_STREAM)
    z = rng.uniform(-4.0, 4.0, IDENTITY_DRAWS)
    c = np.abs(z) + rng.random(IDENTITY_DRAWS) * (4.0 - np.abs(z))
    ramp = max(verify_ramp_identity(zi, ci) for zi, ci in zip(z, c))
    square = 0.0
    for _ in range(IDENTITY_DRAWS):
        d = int(rng.integers(1, 4))
        x = rng.uniform(-1.0, 1.0, d)
        direction = rng.uniform(-1.0, 1.0, d)
        omega = direction / np.abs(direction).sum() * rng.uniform(0.1, 4 * math.pi)
        square = max(square, verify_square_identity(x, omega))
    return [
        at_most('ramp-identity', ramp, IDENTITY_TOL),
        at_most('square-identity', square, IDENTITY_TOL),
    ]


def sine_family_checks(seed=0):
    """Orthogonality and norms for R <= 4, d <= 2, and the unit-interval mass of |sin|."""
    checks = []
    for R, d in itertools.product(range(1, 5), (1, 2)):
        fam = sine_family(R, d)
        gram = sine_family_gram(fam)
        diagonal = np.diag(gram)
        checks.append(at_most(f'gram-offdiagonal-R{R}-d{d}', np.abs(gram - np.diag(diagonal)).max(), GRAM_TOL))
        checks.append(at_most(f'norm-formula-R{R}-d{d}', np.abs(np.sqrt(diagonal) - fam.norms).max(), GRAM_TOL))
    worst = 0.0
    for k in range(1, 9):
        value, _ = integrate.quad(
            lambda t: abs(math.sin(math.pi * k * t)), 0.0, 1.0,
            points=[j / k for j in range(1, k)] or None, epsabs=1e-12, epsrel=1e-12, limit=200,
        )
        worst = max(worst, abs(value - 2 / math.pi))
    checks.append(at_most('abs-sine-mass', worst, ABS_SINE_TOL))
    return checks


def packing_checks(seed=0):
    """Greedy code on the sixteen-member family and the packing curve against the family count."""
    fam = sine_family(4, 2)
    packing = select_packing(fam, seed=seed)
    checks = [
        at_least('packing-size', len(packing), PACKING_MIN_SIZE),
        at_least('packing-separation', packing.min_distance, packing.separation_bound),
    ]
    for R, d in ((4, 1), (4, 2)):
        curve = packing_lower_curve(packing_scale(R, d), d)
        count = math.log(2) * ((1 - ENTROPY_QUARTER) * R ** d - 1)
        checks.append(at_least(f'packing-curve-R{R}-d{d}', count - curve, -CURVE_TOL))
    return checks


def _threshold_pvalue(rep, seed):
    """Chi-square of the t marginal against the closed-form mixture of |cos| CDFs."""
    draws = sample_atom(rep, SAMPLER_DRAWS, seed=seed)
    edges = np.linspace(0.0, 1.0, SAMPLER_BINS + 1)
    pairs = rep.pairs
    cdf = sum(
        pairs.spectral_weight[k] * arcs.abs_cdf(edges, pairs.rate[k], pairs.offset[k])
        for k in range(len(pairs))
    ) / pairs.exact_weight.sum()
    observed, _ = np.histogram(draws.thresholds, bins=edges)
    probs = np.diff(cdf)
    _, pvalue = stats.chisquare(observed, probs / probs.sum() * observed.sum())
    return pvalue


def _fidelity(theta):
    rep = exact_sine_representation(theta)
    axis = np.linspace(-1.0, 1.0, FIDELITY_GRID)
    x = np.array(list(itertools.product(axis, repeat=len(theta))))
    expected = residual(sine_ridge_target(theta), x, 2)
    return np.abs(represented_by_quadrature(rep, x) - expected).max()


def sampler_fit_checks(seed=0):
    """Threshold histograms against the exact densities, and quadrature of the sine representation."""
    reps = {
        'sine-1': exact_sine_representation((1,)),
        'sine-1,1': exact_sine_representation((1, 1)),
        'cosine-pair-s2': spectral_representation(cosine_pair_measure(), 2),
        'cosine-pair-s3': spectral_representation(cosine_pair_measure(), 3),
    }
    checks = [
        at_least(f'threshold-fit-{name}', _threshold_pvalue(rep, seed), SAMPLER_MIN_PVALUE)
        for name, rep in reps.items()
    ]
    for theta in ((1,), (2,), (1, 1)):
        name = ','.join(map(str, theta))
        checks.append(at_most(f'sine-representation-{name}', _fidelity(theta), FIDELITY_TOL))
    return checks


SUITES = {
    'identities': identity_checks,
    'sine-family': sine_family_checks,
    'packing': packing_checks,
    'sampler-fit': sampler_fit_checks,
}
