import csv
import hashlib
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import django
import numpy as np
import scipy
from django.conf import settings
from django.core.exceptions import ValidationError

import ridgeapprox
from construct.builders import build
from construct.models import StratumSamplingError
from metrics.errors import fit_rate, lower_bound_floor, measure
from metrics.models import REPORT_FIELDS
from ridge_core.serializers import dumps
from spectral.sampling import representation_for

from .models import MEAN_FIELDS, RESULT_FIELDS, STATUS_FAILED, STATUS_OK, SweepResult, SweepRow

logger = logging.getLogger(__name__)

TOOL = 'ridgeapprox'
BUILD_ERRORS = (StratumSamplingError, ValidationError, ValueError, ArithmeticError)


class ConfigError(ValueError):
    pass


class BuilderError(RuntimeError):
    pass


def load_config(path):
    """Read a JSON experiment config; a bare ``method`` is accepted for ``methods``."""
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"Cannot read config {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"Config {path} must hold a JSON object.")
    if 'method' in doc and 'methods' not in doc:
        method = doc.pop('method')
        doc['methods'] = method if isinstance(method, list) else [method]
    return doc


def merge_options(file_options, overrides):
    merged = dict(file_options)
    # les flags non fournis valent None et gardent la valeur du fichier
    merged.update({key: value for key, value in overrides.items() if value is not None})
    return merged


def validate(form_class, data):
    form = form_class(data)
    if not form.is_valid():
        messages = [
            f"{field}: {message}" if field != '__all__' else message
            for field, errors in form.errors.items() for message in errors
        ]
        raise ConfigError('; '.join(messages))
    return form.to_config()


def prepare(config):
    entry = config.entry()
    rep = representation_for(entry, config.s, config.sampler, seed=config.seeds[0])
    return entry.target(), rep


def build_one(config, target, rep, method, m, seed):
    try:
        return build(
            rep, target, method, m, seed=seed, eps=config.epsilon, mode=config.mode,
            m0=config.m0, masses=config.masses,
        )
    except BUILD_ERRORS as exc:
        raise BuilderError(f"{method} builder failed for m={m}, seed={seed}: {exc}") from exc


def run_build(config):
    target, rep = prepare(config)
    method, m, seed = config.methods[0], config.m[0], config.seeds[0]
    c = build_one(config, target, rep, method, m, seed)
    report = measure(target, c, m=m, method=method, seed=seed, nodes=config.nodes, resolution=config.resolution)
    return c, report


def _floor(m, d, s):
    return lower_bound_floor(m, d, s) if m >= 2 else None


def run_cell(config, target, rep, method, m, seed):
    floor = _floor(m, rep.d, rep.s)
    try:
        c = build_one(config, target, rep, method, m, seed)
    except BuilderError as exc:
        logger.warning("%s", exc)
        return SweepRow(method=method, m=m, seed=seed, floor=floor, status=STATUS_FAILED)
    report = measure(target, c, m=m, method=method, seed=seed, nodes=config.nodes, resolution=config.resolution)
    return SweepRow(method=method, m=m, seed=seed, report=report, floor=floor)


def _fit(points, method, norm):
    try:
        return fit_rate(points)
    except ValueError as exc:
        logger.warning("No %s rate fit for %s: %s", norm, method, exc)
        return None


# moyennes par (method, m) sur les seeds réussis, puis un fit par méthode et par norme
def summarize(rows, d, s):
    means, fits = [], {}
    for method in sorted({row.method for row in rows}):
        per_m = {}
        for row in rows:
            if row.method == method and row.status == STATUS_OK:
                per_m.setdefault(row.m, []).append(row.report)
        for m in sorted(per_m):
            reports = per_m[m]
            means.append((
                method, m, float(np.mean([r.l2 for r in reports])),
                float(np.mean([r.linf for r in reports])), _floor(m, d, s),
            ))
        method_means = [mean for mean in means if mean[0] == method]
        fits[method] = {
            'l2': _fit([(mean[1], mean[2]) for mean in method_means], method, 'l2'),
            'linf': _fit([(mean[1], mean[3]) for mean in method_means], method, 'linf'),
        }
    return tuple(means), fits


def run_sweep(config, workers=None):
    """
    Every (method, m, seed) cell in a thread pool; rows are collected and
    sorted before anything is written, so the worker count never changes the output.
    """
    target, rep = prepare(config)
    cells = [(method, m, seed) for method in config.methods for m in config.m for seed in config.seeds]
    with ThreadPoolExecutor(max_workers=workers or settings.RIDGE_WORKERS) as pool:
        futures = [pool.submit(run_cell, config, target, rep, *cell) for cell in cells]
        rows = sorted((future.result() for future in futures), key=lambda row: row.sort_key)
    means, fits = summarize(rows, rep.d, rep.s)
    result = SweepResult(config=config, rows=tuple(rows), means=means, fits=fits)
    logger.info("Sweep of %d cells finished with %d failures.", len(rows), result.failed)
    return result


def write_csv(path, header, rows):
    with open(path, 'w', newline='') as handle:
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(header)
        writer.writerows(rows)


def write_json(path, doc):
    Path(path).write_text(json.dumps(doc, indent=2) + '\n')


def _digest(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_manifest(out, config, files):
    out = Path(out)
    write_json(out / 'manifest.json', {
        'tool': TOOL,
        'version': ridgeapprox.__version__,
        'config_hash': config.config_hash,
        'config': config.as_dict(),
        'versions': {'django': django.get_version(), 'numpy': np.__version__, 'scipy': scipy.__version__},
        'files': {name: _digest(out / name) for name in files},
    })


def write_build(out, config, c, report):
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    (out / 'combination.json').write_text(dumps(c) + '\n')
    write_csv(out / 'report.csv', REPORT_FIELDS, [report.as_row()])
    write_manifest(out, config, ['combination.json', 'report.csv'])


def write_sweep(out, result):
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / 'results.csv', RESULT_FIELDS, [row.as_row() for row in result.rows])
    write_csv(out / 'means.csv', MEAN_FIELDS, result.mean_rows())
    write_json(out / 'fits.json', result.fits_document())
    write_manifest(out, result.config, ['results.csv', 'means.csv', 'fits.json'])
