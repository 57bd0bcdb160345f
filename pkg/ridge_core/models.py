from dataclasses import dataclass

import numpy as np
from django.core.exceptions import ValidationError

NORM_TOL = 1e-12


class DimensionMismatch(ValueError):
    """Raised when a point or vector does not match the dimension of an atom."""


def _frozen(array, dtype=float):
    out = np.array(array, dtype=dtype, copy=True)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class CubeDomain:
    """The cube D = [-1, 1]^d."""

    d: int

    def __post_init__(self):
        self.clean()

    def clean(self):
        if int(self.d) != self.d or self.d < 1:
            raise ValidationError(f"Dimension must be a positive integer, got {self.d}.")

    def contains(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.d:
            raise DimensionMismatch(f"Point has dimension {x.shape[-1]}, cube has {self.d}.")
        return bool(np.all(np.abs(x) <= 1.0))


@dataclass(frozen=True, eq=False)
class RidgeAtom:
    """One term eta * (a.x - t)_+^(s-1) with ||a||_1 <= 1 and 0 <= t <= 1."""

    sign: int
    a: np.ndarray
    t: float
    s: int

    def __post_init__(self):
        object.__setattr__(self, 'a', _frozen(self.a))
        object.__setattr__(self, 't', float(self.t))
        self.clean()

    def clean(self):
        if self.sign not in (-1, 1):
            raise ValidationError(f"Atom sign must be -1 or +1, got {self.sign}.")
        if self.s not in (2, 3):
            raise ValidationError(f"Atom order must be 2 or 3, got {self.s}.")
        if self.a.ndim != 1 or self.a.size == 0:
            raise ValidationError("Inner weights must be a non-empty vector.")
        if np.abs(self.a).sum() > 1.0 + NORM_TOL:
            raise ValidationError(f"Inner weights have l1 norm {np.abs(self.a).sum()} > 1.")
        if not 0.0 <= self.t <= 1.0:
            raise ValidationError(f"Threshold {self.t} is outside [0, 1].")

    @property
    def d(self):
        return self.a.size


@dataclass(frozen=True, eq=False)
class RidgeCombination:
    """
    b0 + a0.x + [s=3] x'A0x/2 + (v / ((s-1)! m)) * sum_k b_k (a_k.x - t_k)_+^(s-1).

    Terms are stored column-wise: ``coefs`` (b_k), ``signs`` (the eta of the
    atom each coefficient came from), ``weights`` (one row a_k per term) and
    ``thresholds`` (t_k). ``m`` is the outer normalizer; it defaults to the
    number of terms.
    """

    d: int
    s: int
    b0: float
    a0: np.ndarray
    v: float
    coefs: np.ndarray
    signs: np.ndarray
    weights: np.ndarray
    thresholds: np.ndarray
    A0: np.ndarray = None
    m: float = None

    def __post_init__(self):
        object.__setattr__(self, 'b0', float(self.b0))
        object.__setattr__(self, 'v', float(self.v))
        object.__setattr__(self, 'a0', _frozen(self.a0))
        object.__setattr__(self, 'coefs', _frozen(self.coefs))
        object.__setattr__(self, 'signs', _frozen(self.signs, dtype=np.int8))
        object.__setattr__(self, 'weights', _frozen(np.reshape(self.weights, (-1, self.d))))
        object.__setattr__(self, 'thresholds', _frozen(self.thresholds))
        if self.A0 is not None:
            object.__setattr__(self, 'A0', _frozen(self.A0))
        if self.m is None:
            object.__setattr__(self, 'm', len(self.coefs))
        self.clean()

    def clean(self):
        if self.s not in (2, 3):
            raise ValidationError(f"Order must be 2 or 3, got {self.s}.")
        if self.a0.shape != (self.d,):
            raise ValidationError(f"Linear term has shape {self.a0.shape}, expected ({self.d},).")
        if self.A0 is not None:
            if self.s == 2:
                raise ValidationError("A ReLU combination has no quadratic term.")
            if self.A0.shape != (self.d, self.d) or not np.allclose(self.A0, self.A0.T):
                raise ValidationError("Quadratic term must be a symmetric d x d matrix.")
        if self.v < 0:
            raise ValidationError(f"Scale v must be nonnegative, got {self.v}.")
        n = len(self.coefs)
        if not (len(self.signs) == len(self.thresholds) == self.weights.shape[0] == n):
            raise ValidationError("Term arrays have inconsistent lengths.")
        if n and self.m <= 0:
            raise ValidationError(f"Outer normalizer must be positive, got {self.m}.")
        if np.any(np.abs(self.coefs) > 1.0 + NORM_TOL):
            raise ValidationError("Outer coefficients must lie in [-1, 1].")
        if np.any((self.signs != 1) & (self.signs != -1)):
            raise ValidationError("Atom signs must be -1 or +1.")
        nonzero = self.coefs != 0
        if np.any(np.sign(self.coefs[nonzero]) != self.signs[nonzero]):
            raise ValidationError("Coefficient signs disagree with atom signs.")
        if np.any(np.abs(self.weights).sum(axis=1) > 1.0 + NORM_TOL):
            raise ValidationError("Inner weights must have l1 norm at most 1.")
        if np.any((self.thresholds < 0) | (self.thresholds > 1)):
            raise ValidationError("Thresholds must lie in [0, 1].")

    @classmethod
    def from_terms(cls, d, s, b0, a0, v, terms, A0=None, m=None):
        """Build from a list of ``(b_k, RidgeAtom)`` pairs."""
        terms = list(terms)
        for _, atom in terms:
            if atom.s != s or atom.d != d:
                raise ValidationError("All atoms must share the combination's order and dimension.")
        return cls(
            d=d, s=s, b0=b0, a0=a0, v=v, A0=A0, m=m,
            coefs=[b for b, _ in terms],
            signs=[atom.sign for _, atom in terms],
            weights=np.reshape([atom.a for _, atom in terms], (-1, d)),
            thresholds=[atom.t for _, atom in terms],
        )

    @property
    def term_count(self):
        return len(self.coefs)

    @property
    def outer_factor(self):
        if not self.term_count:
            return 0.0
        return self.v / (self.m * (1 if self.s == 2 else 2))

    @property
    def terms(self):
        return [
            (float(b), RidgeAtom(sign=int(eta), a=a, t=t, s=self.s))
            for b, eta, a, t in zip(self.coefs, self.signs, self.weights, self.thresholds)
        ]

    @property
    def inner_sparsity_max(self):
        if not self.term_count:
            return 0
        return int(np.count_nonzero(self.weights, axis=1).max())

    def replace_weights(self, weights):
        """Copy with new inner weights; every other field is carried over unchanged."""
        return RidgeCombination(
            d=self.d, s=self.s, b0=self.b0, a0=self.a0, v=self.v, A0=self.A0, m=self.m,
            coefs=self.coefs, signs=self.signs, weights=weights, thresholds=self.thresholds,
        )
