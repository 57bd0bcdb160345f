"""Gauss-Legendre rules on intervals and on the cube D = [-1, 1]^d."""
import itertools

import numpy as np


def gauss_legendre(n, interval=(0.0, 1.0)):
    """Nodes and weights of the n-point rule on ``interval``."""
    lo, hi = interval
    nodes, weights = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (hi - lo)
    return lo + half * (nodes + 1.0), half * weights


def composite_gauss_legendre(panels, order=4, interval=(0.0, 1.0)):
    """``panels`` equal panels with an ``order``-point rule on each."""
    lo, hi = interval
    edges = np.linspace(lo, hi, panels + 1)
    ref_nodes, ref_weights = np.polynomial.legendre.leggauss(order)
    half = 0.5 * np.diff(edges)[:, None]
    nodes = edges[:-1, None] + half * (ref_nodes + 1.0)
    weights = half * ref_weights
    return nodes.ravel(), weights.ravel()


def tensor_gauss_legendre(n, d):
    """
    Tensor rule on [-1, 1]^d for the uniform probability measure.

    Returns points of shape (n**d, d) and weights summing to one.
    """
    nodes, weights = np.polynomial.legendre.leggauss(n)
    points = np.array(list(itertools.product(nodes, repeat=d)))
    w = np.prod(np.array(list(itertools.product(weights / 2.0, repeat=d))), axis=1)
    return points, w
