import logging

import numpy as np
from django.conf import settings

from ridge_core.evaluation import relu_power
from ridge_core.models import DimensionMismatch
from ridge_core.quadrature import composite_gauss_legendre
from ridge_core.rng import make_rng

from . import arcs
from .catalog import positive_integer_vector, sine_ridge_measure
from .models import AtomDraws, IntegralRepresentation, PairTable

logger = logging.getLogger(__name__)

SAMPLE_STREAM = 1
EXACT_SINE_MASS_TOL = 1e-9
# points x nodes per block in represented_by_quadrature
QUADRATURE_BLOCK = 2 ** 22


def v_fs(meas, s):
    """sum_j ||omega_j||_1^s mag_j."""
    if s not in (0, 1, 2, 3):
        raise ValueError(f"Spectral norm order must be 0, 1, 2 or 3, got {s}.")
    return float(meas.mags @ meas.l1_norms ** s)


def spectral_representation(meas, s, seed=None):
    """Exact sampler over (z, t, omega) for a discrete measure."""
    pairs = PairTable.from_measure(meas, s)
    return IntegralRepresentation(
        d=meas.d, s=s, kind='spectral', measure=meas,
        v=float(pairs.exact_weight.sum()),
        seed=settings.RIDGE_DEFAULT_SEED if seed is None else seed,
    )


def exact_sine_representation(theta, seed=None):
    """
    ReLU representation of sin(pi theta.x)/(4 pi ||theta||_1^2) - theta.x/(4 ||theta||_1^2).

    The integer l1 norm makes the integral of |sin(pi ||theta||_1 t)| over
    [0, 1] equal 2/pi, so the sampling density has total mass 1 and v = 1.
    """
    theta = positive_integer_vector(theta)
    meas = sine_ridge_measure(theta)
    rep = IntegralRepresentation(
        d=len(theta), s=2, kind='exact-sine', measure=meas, v=1.0,
        seed=settings.RIDGE_DEFAULT_SEED if seed is None else seed, theta=theta,
    )
    mass = float(rep.pairs.exact_weight.sum())
    if abs(mass - 1.0) > EXACT_SINE_MASS_TOL:
        raise ValueError(f"Sine density for theta={theta} has mass {mass}, expected 1.")
    return rep


def simplified_representation(meas, s, seed=None):
    """omega by mag ||w||_1^s with uniform t; v = 2 v_fs."""
    return IntegralRepresentation(
        d=meas.d, s=s, kind='simplified', measure=meas, v=2.0 * v_fs(meas, s),
        seed=settings.RIDGE_DEFAULT_SEED if seed is None else seed,
    )


def representation_for(entry, s, sampler='exact', seed=None):
    """Representation of a catalog entry for the chosen sampler."""
    if sampler == 'simplified':
        return simplified_representation(entry.measure, s, seed)
    if sampler != 'exact':
        raise ValueError(f"Unknown sampler {sampler!r}.")
    if entry.theta is not None and s == 2:
        return exact_sine_representation(entry.theta, seed)
    return spectral_representation(entry.measure, s, seed)


def draw_atoms(rep, n, rng):
    """n atoms from ``rep`` using an existing generator."""
    if n < 1:
        raise ValueError(f"Number of draws must be positive, got {n}.")
    if not rep.signed:
        return _draw_simplified(rep, n, rng)
    pairs = rep.pairs
    weight = pairs.exact_weight
    total = weight.sum() if len(pairs) else 0.0
    if total <= 0:
        raise ValueError("Spectral measure has no atom with positive sampling weight.")
    k = rng.choice(len(pairs), size=n, p=weight / total)
    mass = rng.random(n) * pairs.abs_mass[k]
    t = arcs.abs_cdf_inverse(mass, pairs.rate[k], pairs.offset[k])
    signs = arcs.eta(t, pairs.rate[k], pairs.z[k], pairs.phase[k], rep.s)
    return AtomDraws(
        s=rep.s, coefs=signs.astype(float), signs=signs,
        thresholds=t, weights=pairs.directions[k],
    )


def _draw_simplified(rep, n, rng):
    pairs = rep.pairs
    total = pairs.spectral_weight.sum() if len(pairs) else 0.0
    if total <= 0:
        return AtomDraws.empty(rep.s, rep.d)
    k = rng.choice(len(pairs), size=n, p=pairs.spectral_weight / total)
    t = rng.random(n)
    trig = arcs.signed_trig(t, pairs.rate[k], pairs.z[k], pairs.phase[k], rep.s)
    coefs = -trig if rep.s == 2 else pairs.z[k] * trig
    return AtomDraws(
        s=rep.s, coefs=coefs, signs=np.where(coefs >= 0, 1, -1),
        thresholds=t, weights=pairs.directions[k],
    )


def sample_atom(rep, n, seed=None, stream=()):
    """n i.i.d. atoms (eta, t, a) from the representation's density."""
    rng = make_rng(rep.seed if seed is None else seed, SAMPLE_STREAM, *stream)
    draws = draw_atoms(rep, n, rng)
    logger.debug("Drew %d %s atoms (s=%d, d=%d).", len(draws), rep.kind, rep.s, rep.d)
    return draws


def sample_atom_simplified(meas, s, n, seed=None):
    """Draws with folded coefficients and their scale v = 2 v_fs; empty with v = 0 for constants."""
    rep = simplified_representation(meas, s, seed)
    if rep.v == 0:
        return AtomDraws.empty(s, meas.d), 0.0
    return sample_atom(rep, n), rep.v


def represented_by_quadrature(rep, x, nodes=10_000, order=4):
    """
    v E[coef h(x)] by composite Gauss-Legendre quadrature over t, summed over (omega, z).

    Every sampler of a measure represents the same function, so this is the
    deterministic oracle for all three kinds.
    """
    points = np.atleast_2d(np.asarray(x, dtype=float))
    if points.shape[-1] != rep.d:
        raise DimensionMismatch(f"Point has dimension {points.shape[-1]}, expected {rep.d}.")
    t, w = composite_gauss_legendre(max(1, nodes // order), order)
    pairs = rep.pairs
    scale = 1.0 if rep.s == 2 else 0.5
    rows = max(1, QUADRATURE_BLOCK // t.size)
    out = np.zeros(points.shape[0])
    for k in range(len(pairs)):
        trig = arcs.signed_trig(t, pairs.rate[k], pairs.z[k], pairs.phase[k], rep.s)
        factor = -trig if rep.s == 2 else pairs.z[k] * trig
        kernel = scale * pairs.spectral_weight[k] * factor * w
        projection = points @ pairs.directions[k]
        for start in range(0, points.shape[0], rows):
            block = projection[start:start + rows, None] - t
            out[start:start + rows] += relu_power(block, rep.s - 1) @ kernel
    return out


def residual(target, x, s):
    """f(x) - b0 - a0.x, minus x'A0x/2 as well when s = 3."""
    if target.b0 is None or target.a0 is None or (s == 3 and target.A0 is None):
        raise ValueError(f"Target {target.name!r} lacks the Taylor data needed for s={s}.")
    points = np.atleast_2d(np.asarray(x, dtype=float))
    if points.shape[-1] != target.d:
        raise DimensionMismatch(f"Point has dimension {points.shape[-1]}, expected {target.d}.")
    values = target(points) - target.b0 - points @ target.a0
    if s == 3:
        values = values - 0.5 * np.einsum('ni,ij,nj->n', points, target.A0, points)
    return values
