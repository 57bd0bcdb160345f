import math
from dataclasses import dataclass

import numpy as np
from django.core.exceptions import ValidationError

from ridge_core.models import _frozen


@dataclass(frozen=True, eq=False)
class SineFamily:
    """
    h_theta(x) = sin(pi theta.x) / (4 pi ||theta||_1^2) for theta in {1..R}^d.

    Members are pairwise orthogonal in L2(D, P) with norm 1/(4 sqrt(2) pi ||theta||_1^2).
    """

    R: int
    d: int
    thetas: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 'thetas', _frozen(self.thetas, dtype=np.int64))
        self.clean()

    def clean(self):
        if self.thetas.shape != (self.R ** self.d, self.d):
            raise ValidationError(f"A family with R={self.R}, d={self.d} has {self.R ** self.d} members.")
        if self.thetas.min() < 1 or self.thetas.max() > self.R:
            raise ValidationError(f"Family frequencies must lie in 1..{self.R}.")

    def __len__(self):
        return self.thetas.shape[0]

    @property
    def l1_norms(self):
        return self.thetas.sum(axis=1)

    @property
    def scales(self):
        return 1.0 / (4 * math.pi * self.l1_norms ** 2)

    @property
    def norms(self):
        return 1.0 / (4 * math.sqrt(2) * math.pi * self.l1_norms ** 2)

    @property
    def min_norm(self):
        return float(self.norms.min())

    def evaluate(self, x):
        """Member values, shape (points, members)."""
        points = np.atleast_2d(np.asarray(x, dtype=float))
        return np.sin(math.pi * points @ self.thetas.T) * self.scales


@dataclass(frozen=True, eq=False)
class PackingSet:
    """
    Codewords w in {0,1}^|H| and the averages (1/|H|) sum_h w_h h they induce.

    ``shortfall`` is set when greedy search stopped before reaching ``target_size``.
    """

    family: SineFamily
    codewords: np.ndarray
    min_distance: float
    separation_bound: float
    target_size: int
    trials: int

    def __post_init__(self):
        object.__setattr__(self, 'codewords', _frozen(self.codewords, dtype=np.uint8))
        self.clean()

    def clean(self):
        if self.codewords.ndim != 2 or self.codewords.shape[1] != len(self.family):
            raise ValidationError("Codewords must have one bit per family member.")

    def __len__(self):
        return self.codewords.shape[0]

    @property
    def shortfall(self):
        return len(self) < self.target_size

    def evaluate(self, x):
        """Values of every induced function, shape (points, codewords)."""
        return self.family.evaluate(x) @ self.codewords.T / len(self.family)
