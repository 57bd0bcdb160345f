"""Named test functions with exact spectral measures."""
import math
from dataclasses import dataclass

import numpy as np

from .models import SpectralMeasure, TargetFunction

SINE_RIDGE = 'sine-ridge'
COSINE_SUM = 'cosine-sum'
COSINE_PAIR = 'cosine-pair'

BUILTIN_NAMES = ('sine-ridge:1', 'sine-ridge:1,1', 'sine-ridge:2,1', COSINE_PAIR)


def positive_integer_vector(theta):
    """Validate theta as a non-empty vector of positive integers."""
    values = []
    for item in theta:
        if isinstance(item, str):
            item = item.strip()
        try:
            number = float(item)
        except (TypeError, ValueError):
            raise ValueError(f"theta entries must be positive integers, got {item!r}.") from None
        if not number.is_integer() or number < 1:
            raise ValueError(f"theta entries must be positive integers, got {item!r}.")
        values.append(int(number))
    if not values:
        raise ValueError("theta must have at least one entry.")
    return tuple(values)


def parse_theta(text):
    return positive_integer_vector([item for item in text.strip().strip('()').split(',') if item.strip()])


def sine_ridge_measure(theta):
    """Single atom of sin(pi theta.x) / (4 pi ||theta||_1^2)."""
    theta = positive_integer_vector(theta)
    norm = sum(theta)
    label = ','.join(str(k) for k in theta)
    return SpectralMeasure.from_atoms(
        len(theta),
        [(math.pi * np.array(theta, dtype=float), 1.0 / (4 * math.pi * norm ** 2), -math.pi / 2)],
        name=f'{SINE_RIDGE}:{label}',
    )


def sine_ridge_target(theta):
    theta = positive_integer_vector(theta)
    norm = sum(theta)
    direction = np.array(theta, dtype=float)
    scale = 1.0 / (4 * math.pi * norm ** 2)
    d = len(theta)
    return TargetFunction(
        d=d,
        evaluator=lambda x: scale * np.sin(math.pi * (x @ direction)),
        b0=0.0,
        a0=direction / (4 * norm ** 2),
        A0=np.zeros((d, d)),
        name=sine_ridge_measure(theta).name,
    )


def cosine_pair_measure():
    """Two-atom cosine sum on D = [-1, 1]^2 with nonzero value, gradient and Hessian at 0."""
    return SpectralMeasure.from_atoms(2, [
        ((math.pi, math.pi / 2), 0.5, 0.3),
        ((-math.pi / 2, math.pi), 0.25, -1.0),
    ], name=COSINE_PAIR)


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    measure: SpectralMeasure
    theta: tuple = None

    @property
    def d(self):
        return self.measure.d

    def target(self):
        if self.theta is not None:
            return sine_ridge_target(self.theta)
        return TargetFunction.from_measure(self.measure)


def resolve_target(spec):
    """
    Look up a target by catalog name.

    ``sine-ridge:1,2`` (parentheses optional), ``cosine-sum:<path to measure JSON>``
    or ``cosine-pair``.
    """
    kind, _, arg = spec.partition(':')
    if kind == SINE_RIDGE and arg:
        theta = parse_theta(arg)
        measure = sine_ridge_measure(theta)
        return CatalogEntry(name=measure.name, measure=measure, theta=theta)
    if kind == COSINE_SUM and arg:
        try:
            measure = SpectralMeasure.load(arg)
        except OSError as exc:
            raise ValueError(f"Cannot read spectral measure {arg!r}: {exc}") from exc
        return CatalogEntry(name=spec, measure=measure)
    if spec == COSINE_PAIR:
        return CatalogEntry(name=COSINE_PAIR, measure=cosine_pair_measure())
    raise ValueError(f"Unknown target {spec!r}.")
