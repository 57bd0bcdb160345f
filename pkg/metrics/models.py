from dataclasses import dataclass

from django.core.exceptions import ValidationError

REPORT_FIELDS = ('m', 'method', 'seed', 'l2', 'linf', 'terms', 'sparsity')


def format_float(value):
    """Shortest repr that round-trips, so rewritten files are byte-identical."""
    return repr(float(value))


@dataclass(frozen=True)
class ErrorReport:
    m: int
    method: str
    seed: int
    l2: float
    linf: float
    term_count: int
    inner_sparsity_max: int

    def __post_init__(self):
        self.clean()

    def clean(self):
        for name in ('m', 'seed', 'l2', 'linf', 'term_count', 'inner_sparsity_max'):
            if getattr(self, name) < 0:
                raise ValidationError(f"Error report field {name} must be nonnegative.")

    def as_row(self):
        """Values in REPORT_FIELDS order, formatted for CSV."""
        return [
            str(self.m), self.method, str(self.seed),
            format_float(self.l2), format_float(self.linf),
            str(self.term_count), str(self.inner_sparsity_max),
        ]


@dataclass(frozen=True)
class RateFit:
    """Least-squares line through (log m, log error)."""

    points: tuple
    slope: float
    intercept: float
    r2: float

    def to_dict(self):
        return {'slope': self.slope, 'intercept': self.intercept, 'r2': self.r2, 'n': len(self.points)}
