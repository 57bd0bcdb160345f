import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from django.core.exceptions import ValidationError

from ridge_core.models import NORM_TOL, RidgeAtom, _frozen

from . import arcs

REPRESENTATION_KINDS = ('spectral', 'exact-sine', 'simplified')


def wrap_phase(phase):
    """Map a phase into (-pi, pi]."""
    return math.pi - (math.pi - phase) % (2 * math.pi)


@dataclass(frozen=True, eq=False)
class SpectralMeasure:
    """
    Discrete Fourier measure of f(x) = sum_j mag_j cos(omega_j . x + phase_j).

    One stored atom stands for a +-omega pair, so targets are real by
    construction.
    """

    d: int
    omegas: np.ndarray
    mags: np.ndarray
    phases: np.ndarray
    name: str = ''

    def __post_init__(self):
        object.__setattr__(self, 'omegas', _frozen(np.reshape(self.omegas, (-1, self.d))))
        object.__setattr__(self, 'mags', _frozen(self.mags))
        object.__setattr__(self, 'phases', _frozen(self.phases))
        self.clean()

    def clean(self):
        if int(self.d) != self.d or self.d < 1:
            raise ValidationError(f"Dimension must be a positive integer, got {self.d}.")
        n = self.omegas.shape[0]
        if self.mags.shape != (n,) or self.phases.shape != (n,):
            raise ValidationError("Frequencies, magnitudes and phases have inconsistent lengths.")
        if np.any(self.mags <= 0):
            raise ValidationError("Magnitudes must be positive.")
        if np.any((self.phases <= -math.pi) | (self.phases > math.pi)):
            raise ValidationError("Phases must lie in (-pi, pi].")
        if n and np.unique(self.omegas, axis=0).shape[0] != n:
            raise ValidationError("Duplicate frequency in spectral measure.")

    @classmethod
    def from_atoms(cls, d, atoms, name=''):
        """Build from ``(omega, mag, phase)`` triples; phases are wrapped into (-pi, pi]."""
        atoms = list(atoms)
        return cls(
            d=d,
            omegas=np.reshape([omega for omega, _, _ in atoms], (-1, d)),
            mags=[mag for _, mag, _ in atoms],
            phases=[wrap_phase(float(phase)) for _, _, phase in atoms],
            name=name,
        )

    def __len__(self):
        return len(self.mags)

    @property
    def l1_norms(self):
        return np.abs(self.omegas).sum(axis=1)

    def evaluate(self, x):
        points = np.atleast_2d(np.asarray(x, dtype=float))
        return np.cos(points @ self.omegas.T + self.phases) @ self.mags

    @property
    def value_at_zero(self):
        return float(self.mags @ np.cos(self.phases))

    @property
    def gradient_at_zero(self):
        return -(self.mags * np.sin(self.phases)) @ self.omegas

    @property
    def hessian_at_zero(self):
        scale = self.mags * np.cos(self.phases)
        return -np.einsum('j,ji,jk->ik', scale, self.omegas, self.omegas)

    def to_dict(self):
        return {
            'dim': self.d,
            'atoms': [
                {'omega': [float(w) for w in omega], 'mag': float(mag), 'phase': float(phase)}
                for omega, mag, phase in zip(self.omegas, self.mags, self.phases)
            ],
        }

    @classmethod
    def from_dict(cls, doc, name=''):
        try:
            d = int(doc['dim'])
            atoms = [(a['omega'], float(a['mag']), float(a['phase'])) for a in doc['atoms']]
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"Malformed spectral measure document: {exc}") from exc
        return cls.from_atoms(d, atoms, name=name)

    @classmethod
    def load(cls, path):
        path = Path(path)
        return cls.from_dict(json.loads(path.read_text()), name=path.stem)

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=1))


@dataclass(frozen=True)
class TargetFunction:
    """A target on D with its value, gradient and Hessian at the origin."""

    d: int
    evaluator: object
    b0: float = None
    a0: np.ndarray = None
    A0: np.ndarray = None
    name: str = ''

    def __call__(self, x):
        return self.evaluator(np.atleast_2d(np.asarray(x, dtype=float)))

    @classmethod
    def from_measure(cls, meas):
        return cls(
            d=meas.d,
            evaluator=meas.evaluate,
            b0=meas.value_at_zero,
            a0=meas.gradient_at_zero,
            A0=meas.hessian_at_zero,
            name=meas.name,
        )


@dataclass(frozen=True, eq=False)
class PairTable:
    """
    One row per (frequency, z) pair with positive l1 norm.

    ``spectral_weight`` is mag ||w||_1^s and ``abs_mass`` the integral over
    [0, 1] of |trig(z ||w||_1 t + b)|; the exact sampler picks a pair with
    probability proportional to their product.
    """

    s: int
    atom: np.ndarray
    z: np.ndarray
    rate: np.ndarray
    offset: np.ndarray
    phase: np.ndarray
    spectral_weight: np.ndarray
    abs_mass: np.ndarray
    directions: np.ndarray

    @classmethod
    def from_measure(cls, meas, s):
        norms = meas.l1_norms
        live = np.flatnonzero(norms > 0)
        atom = np.concatenate([live, live])
        z = np.repeat([1, -1], live.size).astype(np.int8)
        rate = norms[atom]
        phase = meas.phases[atom]
        offset = arcs.pair_offsets(z, phase, s)
        return cls(
            s=s,
            atom=atom,
            z=z,
            rate=rate,
            offset=offset,
            phase=phase,
            spectral_weight=meas.mags[atom] * rate ** s,
            abs_mass=arcs.abs_cdf(1.0, rate, offset),
            directions=z[:, None] * meas.omegas[atom] / rate[:, None],
        )

    def __len__(self):
        return self.atom.size

    @property
    def exact_weight(self):
        return self.spectral_weight * self.abs_mass


@dataclass(frozen=True, eq=False)
class IntegralRepresentation:
    """
    f minus its affine (s=2) or quadratic (s=3) part as v E[coef h(x)] over
    atoms h drawn from one of three samplers:

    ``spectral``    exact density over (z, t, omega), coef = eta
    ``exact-sine``  the spectral sampler of sin(pi theta.x)/(4 pi ||theta||_1^2), v = 1
    ``simplified``  omega by mag ||w||_1^s, t uniform, coef a folded sinusoid
    """

    d: int
    s: int
    kind: str
    measure: SpectralMeasure
    v: float
    seed: int = 0
    theta: tuple = None
    pairs: PairTable = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, 'v', float(self.v))
        object.__setattr__(self, 'pairs', PairTable.from_measure(self.measure, self.s))
        self.clean()

    def clean(self):
        if self.s not in (2, 3):
            raise ValidationError(f"Order must be 2 or 3, got {self.s}.")
        if self.kind not in REPRESENTATION_KINDS:
            raise ValidationError(f"Unknown representation kind {self.kind!r}.")
        if self.measure.d != self.d:
            raise ValidationError("Measure dimension differs from representation dimension.")
        if self.v < 0:
            raise ValidationError(f"Scale v must be nonnegative, got {self.v}.")
        if self.kind == 'exact-sine' and (self.theta is None or self.s != 2):
            raise ValidationError("An exact sine representation needs theta and s = 2.")

    @property
    def signed(self):
        """True when every draw has coefficient +-1."""
        return self.kind != 'simplified'

    def target(self):
        return TargetFunction.from_measure(self.measure)


@dataclass(frozen=True, eq=False)
class AtomDraws:
    """n sampled atoms stored column-wise; ``coefs`` equal ``signs`` for signed samplers."""

    s: int
    coefs: np.ndarray
    signs: np.ndarray
    thresholds: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 'coefs', _frozen(self.coefs))
        object.__setattr__(self, 'signs', _frozen(self.signs, dtype=np.int8))
        object.__setattr__(self, 'thresholds', _frozen(self.thresholds))
        object.__setattr__(self, 'weights', _frozen(self.weights))
        self.clean()

    def clean(self):
        n = len(self.coefs)
        if not (len(self.signs) == len(self.thresholds) == self.weights.shape[0] == n):
            raise ValidationError("Draw arrays have inconsistent lengths.")
        if n and np.any(np.abs(np.abs(self.weights).sum(axis=1) - 1.0) > NORM_TOL):
            raise ValidationError("Sampled inner weights must have unit l1 norm.")
        if np.any((self.thresholds < 0) | (self.thresholds > 1)):
            raise ValidationError("Sampled thresholds must lie in [0, 1].")

    @classmethod
    def empty(cls, s, d):
        return cls(s=s, coefs=[], signs=[], thresholds=[], weights=np.zeros((0, d)))

    def __len__(self):
        return len(self.coefs)

    def __iter__(self):
        for coef, sign, t, a in zip(self.coefs, self.signs, self.thresholds, self.weights):
            yield float(coef), RidgeAtom(sign=int(sign), a=a, t=t, s=self.s)
