import math
from dataclasses import dataclass, replace

import numpy as np
from django.core.exceptions import ValidationError

from ridge_core.evaluation import lipschitz_factor
from ridge_core.models import RidgeAtom, _frozen

MASS_TOL = 1e-12


class StratumSamplingError(RuntimeError):
    """A stratum with positive mass got too few draws within the retry budget."""

    def __init__(self, stratum_id, attempts):
        self.stratum_id = stratum_id
        self.attempts = attempts
        super().__init__(f"Stratum {stratum_id} unfilled after {attempts} draws.")


@dataclass(frozen=True)
class ParameterPartition:
    """
    Partition of {-1, +1} x [0, 1] x S^{d-1} into cells of sup-distance diameter < eps.

    A cell is an atom sign, a half-open t-bin, a sign orthant of a (zero
    counts as positive) and a simplex-grid cell on |a_1|, ..., |a_{d-1}|.
    Cells are identified by an integer key; only index tuples with sum at most
    K - 1 occur, giving M = 2 T 2^d C(K + d - 2, d - 1) cells.
    """

    d: int
    s: int
    eps: float

    def __post_init__(self):
        self.clean()

    def clean(self):
        if self.s not in (2, 3):
            raise ValidationError(f"Order must be 2 or 3, got {self.s}.")
        if int(self.d) != self.d or self.d < 1:
            raise ValidationError(f"Dimension must be a positive integer, got {self.d}.")

    @property
    def bin_width(self):
        return self.eps / (4 * lipschitz_factor(self.s))

    @property
    def mesh(self):
        return self.eps / (4 * max(1, self.d - 1) * lipschitz_factor(self.s))

    @property
    def bins(self):
        return math.ceil(1 / self.bin_width - 1e-9)

    @property
    def cells_per_axis(self):
        return math.ceil(1 / self.mesh - 1e-9)

    @property
    def orthants(self):
        return 2 ** self.d

    @property
    def simplex_cells(self):
        return math.comb(self.cells_per_axis - 1 + self.d - 1, self.d - 1)

    @property
    def M(self):
        return 2 * self.bins * self.orthants * self.simplex_cells

    def locate(self, signs, thresholds, weights):
        """Cell keys of atoms given column-wise."""
        signs = np.asarray(signs)
        weights = np.reshape(np.asarray(weights, dtype=float), (-1, self.d))
        t_idx = np.minimum(np.floor(np.asarray(thresholds) / self.bin_width), self.bins - 1).astype(np.int64)
        orthant = (weights < 0).astype(np.int64) @ (2 ** np.arange(self.d, dtype=np.int64))
        key = (np.where(signs > 0, 0, 1).astype(np.int64) * self.bins + t_idx) * self.orthants + orthant
        return key * self.cells_per_axis ** (self.d - 1) + self._simplex_index(np.abs(weights))

    def _simplex_index(self, magnitudes):
        K = self.cells_per_axis
        cells = np.minimum(np.floor(magnitudes[:, :-1] / self.mesh), K - 1).astype(np.int64)
        over = cells.sum(axis=1) > K - 1
        while np.any(over):
            rows = np.flatnonzero(over)
            cells[rows, np.argmax(cells[rows], axis=1)] -= 1
            over = cells.sum(axis=1) > K - 1
        return cells @ (K ** np.arange(self.d - 1, dtype=np.int64))

    def decode(self, key):
        """(sign, t-bin, orthant, simplex cell tuple) of a key."""
        K = self.cells_per_axis
        key, flat = divmod(int(key), K ** (self.d - 1))
        key, orthant = divmod(key, self.orthants)
        eta_idx, t_idx = divmod(key, self.bins)
        cell = []
        for _ in range(self.d - 1):
            flat, k = divmod(flat, K)
            cell.append(k)
        return (1 if eta_idx == 0 else -1), t_idx, orthant, tuple(cell)

    def representative(self, key):
        """Atom at the cell center, renormalized onto the unit l1 sphere."""
        sign, t_idx, orthant, cell = self.decode(key)
        centers = [(k + 0.5) * self.mesh for k in cell]
        magnitudes = np.array(centers + [max(0.5 * self.mesh, 1.0 - sum(centers))])
        magnitudes /= magnitudes.sum()
        directions = np.where((orthant >> np.arange(self.d)) & 1, -1.0, 1.0)
        t = min(1.0, (t_idx + 0.5) * self.bin_width)
        return RidgeAtom(sign=sign, a=directions * magnitudes, t=t, s=self.s)


@dataclass(frozen=True, eq=False)
class PieceTable:
    """
    Sub-intervals [left, right] of one (frequency, z) pair on which the atom
    sign and the stratum are constant, sorted by stratum key.
    """

    pair: np.ndarray
    left: np.ndarray
    right: np.ndarray
    mass: np.ndarray
    sign: np.ndarray
    key: np.ndarray

    def __len__(self):
        return self.key.size


@dataclass(frozen=True, eq=False)
class StratifiedPlan:
    """
    Strata with positive mass, their masses L_k and, once allocated, m_k and n_k.

    Masses are normalized to sum to one. ``pieces`` is present when the
    masses are exact and drives conditional sampling; estimated plans sample
    by rejection instead.
    """

    partition: ParameterPartition
    keys: np.ndarray
    masses: np.ndarray
    pieces: PieceTable = None
    mode: str = None
    budget: int = None
    allocations: np.ndarray = None
    sizes: np.ndarray = None

    def __post_init__(self):
        object.__setattr__(self, 'keys', _frozen(self.keys, dtype=np.int64))
        object.__setattr__(self, 'masses', _frozen(self.masses))
        if self.allocations is not None:
            object.__setattr__(self, 'allocations', _frozen(self.allocations))
        if self.sizes is not None:
            object.__setattr__(self, 'sizes', _frozen(self.sizes, dtype=np.int64))
        self.clean()

    def clean(self):
        if self.keys.shape != self.masses.shape:
            raise ValidationError("Stratum keys and masses have inconsistent lengths.")
        if np.any(self.masses < 0):
            raise ValidationError("Stratum masses must be nonnegative.")
        if self.sizes is not None and self.sizes.sum() > self.budget + self.M:
            raise ValidationError("Allocated sample sizes exceed m + M.")

    @property
    def eps(self):
        return self.partition.eps

    @property
    def M(self):
        return self.partition.M

    @property
    def strata(self):
        return [(self.partition.representative(k), float(L)) for k, L in zip(self.keys, self.masses)]

    @property
    def is_normalized(self):
        return abs(float(self.masses.sum()) - 1.0) <= MASS_TOL

    def with_allocation(self, mode, budget, allocations, sizes):
        return replace(self, mode=mode, budget=budget, allocations=allocations, sizes=sizes)


@dataclass(frozen=True)
class SparsifierConfig:
    m0: int
    seed: int = 0

    def __post_init__(self):
        self.clean()

    def clean(self):
        if int(self.m0) != self.m0 or self.m0 < 1:
            raise ValidationError(f"Inner sparsity budget must be a positive integer, got {self.m0}.")
