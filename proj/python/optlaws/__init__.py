"""Python bindings for the optlaws C++ library.

Structured inputs and outputs are plain dicts; the extension exchanges them
as JSON text.
"""

import json as _json

from . import _optlaws
from ._optlaws import Schedule, feature_names, features

__all__ = [
    "Schedule",
    "criterion",
    "feature_names",
    "features",
    "fit_csv",
    "predict",
    "rank",
    "simulate",
    "validate",
]


def _law_text(law):
    return law if law == "reference" else _json.dumps(law)


def criterion(eta_max, warmup, model, tokens):
    """Divergence ratio R, critical rate and verdict for normalized inputs."""
    return _json.loads(_optlaws.criterion(eta_max, warmup, model, tokens))


def fit_csv(path, policy="a1/a3/a2", terms="full", cooldown="linear"):
    """Fit a law to a run-log CSV and return it as a dict."""
    return _json.loads(_optlaws.fit_csv(str(path), policy, terms, cooldown))


def predict(law, config):
    """Predict the final loss of one config. `law` may be "reference"."""
    return _json.loads(_optlaws.predict(_law_text(law), _json.dumps(config)))


def rank(law, configs):
    return _json.loads(_optlaws.rank(_law_text(law), _json.dumps(list(configs))))


def simulate(spec, seed=0):
    """Run an SDE simulation described by `spec` and return its report."""
    return _json.loads(_optlaws.simulate(_json.dumps(spec), seed))


def validate(suite, quick=True, seed=0):
    return _json.loads(_optlaws.validate(suite, quick, seed))
