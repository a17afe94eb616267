"""Operator-aware robot base placement.

Documents (configs, representative sets, regressors, results) are plain dicts.
Array arguments are numpy arrays: traces as positions (N, 3) and
quaternions (N, 4, w first), base poses as (N, 3) rows of X, Y, Theta.
"""

import json

import numpy as np

from . import _core
from ._core import ParseError, TrainingError, __version__, manipulability

__all__ = [
    "ParseError",
    "TrainingError",
    "__version__",
    "analyze",
    "default_config",
    "evaluate",
    "final_score",
    "forward_kinematics",
    "generate_traces",
    "grid_search",
    "inverse_kinematics",
    "jacobian",
    "joint_margin_score",
    "manipulability",
    "predict",
    "reference_arm",
    "sample",
    "train",
]


def _dump(doc):
    if doc is None:
        return ""
    return doc if isinstance(doc, str) else json.dumps(doc)


def default_config():
    return json.loads(_core.default_config())


def normalize_config(config):
    """Fills defaults and validates; raises ValueError on a bad document."""
    return json.loads(_core.normalize_config(_dump(config)))


def reference_arm():
    return json.loads(_core.reference_arm())


def forward_kinematics(q, model=None):
    """Returns (position, quaternion w-first) of the flange in the arm frame."""
    return _core.forward_kinematics(np.asarray(q, dtype=float), _dump(model))


def inverse_kinematics(position, quaternion, model=None):
    """All in-limit joint solutions, one array per IK branch."""
    return _core.inverse_kinematics(
        np.asarray(position, dtype=float), np.asarray(quaternion, dtype=float), _dump(model)
    )


def jacobian(q, model=None):
    return _core.jacobian(np.asarray(q, dtype=float), _dump(model))


def joint_margin_score(q, model=None):
    return _core.joint_margin_score(np.asarray(q, dtype=float), _dump(model))


def generate_traces(config=None):
    """Synthetic traces for the config's operator profile."""
    return _core.generate_traces(_dump(config))


def analyze(positions, quaternions, config=None):
    return json.loads(
        _core.analyze(np.asarray(positions, dtype=float), np.asarray(quaternions, dtype=float), _dump(config))
    )


def final_score(bases, repset, config=None):
    return np.asarray(_core.final_score(np.atleast_2d(np.asarray(bases, dtype=float)), _dump(repset), _dump(config)))


def sample(repset, config=None):
    """Dataset rows (N, 4): X, Y, Theta, score."""
    return _core.sample(_dump(repset), _dump(config))


def train(rows, config=None):
    return json.loads(_core.train(np.asarray(rows, dtype=float), _dump(config)))


def predict(model, bases):
    return np.asarray(_core.predict(_dump(model), np.atleast_2d(np.asarray(bases, dtype=float))))


def grid_search(model, config=None, top_k=10):
    return json.loads(_core.grid_search(_dump(model), _dump(config), top_k))


def evaluate(best, repset, config=None):
    return json.loads(_core.evaluate(np.asarray(best, dtype=float), _dump(repset), _dump(config)))
