"""Lyapunov stability certificates for matrix semigroups."""

import json

from ._core import *  # noqa: F401,F403
from ._core import __version__, certify_json

EXIT_CODES = {"ExponentiallyStable": 0, "Unstable": 2, "Inconclusive": 3}


def _matrix(m):
    return [[float(x) for x in row] for row in m]


def problem(A, C=None, Q=None, **extra):
    """Builds a problem dict; exactly one of C and Q."""
    doc = {"A": _matrix(A)}
    if C is not None:
        doc["C"] = _matrix(C)
    if Q is not None:
        doc["Q"] = _matrix(Q)
    doc.update(extra)
    return doc


def certify(doc):
    """Certifies a problem dict (or JSON text) and returns the certificate dict."""
    text = doc if isinstance(doc, str) else json.dumps(doc)
    return json.loads(certify_json(text))
