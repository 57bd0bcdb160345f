import json

from .models import RidgeCombination

FORMAT_VERSION = 1


def _real(value):
    # repr of a float round-trips exactly (up to 17 significant digits)
    return float(value)


def combination_to_dict(c):
    """Plain dict in the fixed field order of the combination document."""
    doc = {
        'version': FORMAT_VERSION,
        'dim': c.d,
        'order': c.s,
        'b0': _real(c.b0),
        'a0': [_real(x) for x in c.a0],
    }
    if c.A0 is not None:
        doc['A0'] = [[_real(x) for x in row] for row in c.A0]
    doc['v'] = _real(c.v)
    doc['m'] = c.m
    doc['terms'] = [
        {'b': _real(b), 'sign': int(eta), 'a': [_real(x) for x in a], 't': _real(t)}
        for b, eta, a, t in zip(c.coefs, c.signs, c.weights, c.thresholds)
    ]
    return doc


def combination_from_dict(doc):
    version = doc.get('version', FORMAT_VERSION)
    if version != FORMAT_VERSION:
        raise ValueError(f"Unsupported combination format version {version}.")
    terms = doc.get('terms', [])
    return RidgeCombination(
        d=int(doc['dim']),
        s=int(doc['order']),
        b0=doc['b0'],
        a0=doc['a0'],
        A0=doc.get('A0'),
        v=doc['v'],
        m=doc.get('m'),
        coefs=[term['b'] for term in terms],
        signs=[term['sign'] for term in terms],
        weights=[term['a'] for term in terms],
        thresholds=[term['t'] for term in terms],
    )


def dumps(c):
    return json.dumps(combination_to_dict(c), indent=1)


def loads(text):
    return combination_from_dict(json.loads(text))
