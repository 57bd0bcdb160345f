"""
Closed-form CDFs of |cos(C t + beta)| on [0, 1].

Each (frequency, z) pair of a spectral measure draws its threshold t from the
density proportional to |trig(z ||w||_1 t + b)|. Both trig = cos and
trig = sin reduce to |cos(C t + beta)| with C = ||w||_1 > 0, so one primitive
serves every representation and sampling is an exact inversion with no
rejection step.
"""
import numpy as np

HALF_PI = 0.5 * np.pi


def abs_cos_primitive(u):
    """G(u) = integral from 0 to u of |cos|; continuous and increasing."""
    u = np.asarray(u, dtype=float)
    n = np.floor(u / np.pi + 0.5)
    return 2.0 * n + np.sin(u - n * np.pi)


def abs_cos_primitive_inverse(g):
    g = np.asarray(g, dtype=float)
    n = np.floor((g + 1.0) / 2.0)
    return n * np.pi + np.arcsin(np.clip(g - 2.0 * n, -1.0, 1.0))


def pair_offsets(z, phases, s):
    """beta such that |trig(z C t + b)| = |cos(C t + beta)|."""
    shift = HALF_PI if s == 3 else 0.0
    return z * (phases - shift)


def abs_cdf(t, rate, offset):
    """Integral from 0 to t of |cos(rate tau + offset)| d tau."""
    return (abs_cos_primitive(rate * t + offset) - abs_cos_primitive(offset)) / rate


def abs_cdf_inverse(mass, rate, offset):
    target = abs_cos_primitive(offset) + rate * mass
    return np.clip((abs_cos_primitive_inverse(target) - offset) / rate, 0.0, 1.0)


def signed_trig(t, rate, z, phases, s):
    """trig(z C t + b): cos for ReLU atoms, sin for squared ReLU atoms."""
    arg = z * rate * t + phases
    return np.cos(arg) if s == 2 else np.sin(arg)


def eta(t, rate, z, phases, s):
    """
    Atom sign for a draw.

    ReLU: -sgn cos(z C t + b). Squared ReLU: z * sgn sin(z C t + b); the
    factor z comes from the real part of the quadratic identity, where the
    z = -1 branch carries sin(C t - b) = -sin(-C t + b).
    """
    value = signed_trig(t, rate, z, phases, s)
    sign = np.where(value >= 0, 1, -1)
    return (-sign if s == 2 else z * sign).astype(np.int8)


def zeros_in_unit_interval(rate, offset):
    """Points of (0, 1) where cos(rate t + offset) vanishes."""
    first = np.floor((offset - HALF_PI) / np.pi) + 1
    last = np.ceil((rate + offset - HALF_PI) / np.pi)
    k = np.arange(first, last + 1)
    t = (HALF_PI + k * np.pi - offset) / rate
    return t[(t > 0.0) & (t < 1.0)]
