"""Numerical checks of the ramp and square identities behind the representations."""
import numpy as np
from scipy import integrate

from ridge_core.models import DimensionMismatch

QUAD_TOL = 1e-10
QUAD_LIMIT = 200


def _complex_quad(real, imag, lo, hi, points=None):
    kwargs = {'epsabs': QUAD_TOL, 'epsrel': QUAD_TOL, 'limit': QUAD_LIMIT}
    if points:
        kwargs['points'] = points
    re, _ = integrate.quad(real, lo, hi, **kwargs)
    im, _ = integrate.quad(imag, lo, hi, **kwargs)
    return complex(re, im)


def verify_ramp_identity(z, c):
    """
    |-int_0^c [(z-u)_+ e^{iu} + (-z-u)_+ e^{-iu}] du - (e^{iz} - iz - 1)|.
    """
    z, c = float(z), float(c)
    if c < abs(z):
        raise ValueError(f"Upper limit c={c} must be at least |z|={abs(z)}.")
    if c == 0:
        return 0.0

    def real(u):
        return -(max(z - u, 0.0) * np.cos(u) + max(-z - u, 0.0) * np.cos(u))

    def imag(u):
        return -(max(z - u, 0.0) * np.sin(u) - max(-z - u, 0.0) * np.sin(u))

    kink = [abs(z)] if 0 < abs(z) < c else None
    lhs = _complex_quad(real, imag, 0.0, c, kink)
    rhs = np.exp(1j * z) - 1j * z - 1
    return float(abs(lhs - rhs))


def verify_square_identity(x, omega):
    """
    |(i/2) C^3 int_0^1 [(-a.x-t)_+^2 e^{-iCt} - (a.x-t)_+^2 e^{iCt}] dt
      - (e^{i w.x} + (w.x)^2/2 - i w.x - 1)|  with C = ||w||_1, a = w/C.
    """
    x = np.asarray(x, dtype=float)
    omega = np.asarray(omega, dtype=float)
    if x.shape != omega.shape:
        raise DimensionMismatch(f"Point has shape {x.shape}, frequency has shape {omega.shape}.")
    if np.any(np.abs(x) > 1):
        raise ValueError("Point must lie in [-1, 1]^d.")
    rate = float(np.abs(omega).sum())
    if rate == 0:
        raise ValueError("Frequency must be nonzero.")
    p = float(omega @ x) / rate

    def real(t):
        return max(-p - t, 0.0) ** 2 * np.cos(rate * t) - max(p - t, 0.0) ** 2 * np.cos(rate * t)

    def imag(t):
        return -max(-p - t, 0.0) ** 2 * np.sin(rate * t) - max(p - t, 0.0) ** 2 * np.sin(rate * t)

    kink = [abs(p)] if 0 < abs(p) < 1 else None
    integral = _complex_quad(real, imag, 0.0, 1.0, kink)
    lhs = 0.5j * rate ** 3 * integral
    wx = rate * p
    rhs = np.exp(1j * wx) + wx ** 2 / 2 - 1j * wx - 1
    return float(abs(lhs - rhs))
