import hashlib
import json
from dataclasses import asdict, dataclass

from metrics.models import REPORT_FIELDS, format_float
from spectral.catalog import resolve_target

RESULT_FIELDS = REPORT_FIELDS + ('floor', 'status')
MEAN_FIELDS = ('method', 'm', 'l2_mean', 'linf_mean', 'floor')

STATUS_OK = 'ok'
STATUS_FAILED = 'failed'


def _cell(value):
    return '' if value is None else format_float(value)


@dataclass(frozen=True)
class ExperimentConfig:
    """A validated experiment; everything that determines the output files."""

    target: str
    methods: tuple
    m: tuple
    seeds: tuple
    s: int = 2
    sampler: str = 'exact'
    epsilon: float = None
    mode: str = 'fractional'
    m0: int = None
    masses: str = 'exact'
    nodes: int = None
    resolution: int = None

    def as_dict(self):
        doc = asdict(self)
        for key in ('methods', 'm', 'seeds'):
            doc[key] = list(doc[key])
        return doc

    @property
    def config_hash(self):
        canonical = json.dumps(self.as_dict(), sort_keys=True, separators=(',', ':'))
        return hashlib.sha256(canonical.encode()).hexdigest()

    def entry(self):
        return resolve_target(self.target)


@dataclass(frozen=True)
class SweepRow:
    method: str
    m: int
    seed: int
    report: object = None
    floor: float = None
    status: str = STATUS_OK

    @property
    def sort_key(self):
        return (self.method, self.m, self.seed)

    def as_row(self):
        if self.report is None:
            values = [str(self.m), self.method, str(self.seed), '', '', '', '']
        else:
            values = self.report.as_row()
        return values + [_cell(self.floor), self.status]


@dataclass(frozen=True)
class SweepResult:
    """
    Rows sorted by (method, m, seed), per-m seed means and per-method fits.

    ``fits`` maps method to {'l2': RateFit or None, 'linf': RateFit or None}.
    """

    config: ExperimentConfig
    rows: tuple
    means: tuple
    fits: dict

    @property
    def failed(self):
        return sum(row.status != STATUS_OK for row in self.rows)

    @property
    def below_floor(self):
        return sum(
            row.status == STATUS_OK and row.floor is not None and row.report.l2 < row.floor
            for row in self.rows
        )

    def mean_rows(self):
        return [
            [method, str(m), _cell(l2), _cell(linf), _cell(floor)]
            for method, m, l2, linf, floor in self.means
        ]

    def fits_document(self):
        return {
            method: {norm: None if fit is None else fit.to_dict() for norm, fit in fits.items()}
            for method, fits in self.fits.items()
        }


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    tolerance: float
    passed: bool

    def to_dict(self):
        return {'check': self.name, 'value': self.value, 'tolerance': self.tolerance, 'pass': self.passed}


def at_most(name, value, tolerance):
    return Check(name=name, value=float(value), tolerance=float(tolerance), passed=bool(value <= tolerance))


def at_least(name, value, bound):
    return Check(name=name, value=float(value), tolerance=float(bound), passed=bool(value >= bound))
