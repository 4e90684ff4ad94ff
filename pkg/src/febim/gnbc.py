"""Gaussian naive Bayes: training and the float64 software baseline."""

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DimensionMismatch, EmptyClass, NonPositiveVariance
from .schemas import MODEL_SCHEMA, validate

LOG_2PI = math.log(2.0 * math.pi)

# fraction of the largest per-feature variance added to every class variance
VAR_SMOOTHING = 1e-9


@dataclass(frozen=True, eq=False)
class GnbcParams:
    priors: np.ndarray      # (k,)
    means: np.ndarray       # (k, n)
    variances: np.ndarray   # (k, n), floor already added
    class_names: tuple = ()
    feature_names: tuple = ()
    # training-set feature range, kept so a saved model can be mapped without the data
    feature_lo: np.ndarray | None = None
    feature_hi: np.ndarray | None = None

    @property
    def k(self):
        return self.priors.shape[0]

    @property
    def n(self):
        return self.means.shape[1]

    def to_json(self):
        d = {
            "priors": self.priors.tolist(),
            "means": self.means.tolist(),
            "variances": self.variances.tolist(),
            "class_names": list(self.class_names),
            "feature_names": list(self.feature_names),
        }
        if self.feature_lo is not None:
            d["feature_lo"] = self.feature_lo.tolist()
            d["feature_hi"] = self.feature_hi.tolist()
        return d

    @classmethod
    def from_json(cls, d):
        validate(d, MODEL_SCHEMA, "model")
        lo = d.get("feature_lo")
        hi = d.get("feature_hi")
        return cls(
            priors=np.array(d["priors"], dtype=np.float64),
            means=np.array(d["means"], dtype=np.float64),
            variances=np.array(d["variances"], dtype=np.float64),
            class_names=tuple(d["class_names"]),
            feature_names=tuple(d["feature_names"]),
            feature_lo=None if lo is None else np.array(lo, dtype=np.float64),
            feature_hi=None if hi is None else np.array(hi, dtype=np.float64),
        )


def train(ds, var_smoothing=VAR_SMOOTHING, ddof=0):
    """Fit class frequencies and per-class feature moments.

    ``ddof=0`` gives the population variance, which stays defined for
    single-sample classes.
    """
    counts = ds.class_counts()
    if np.any(counts == 0):
        raise EmptyClass(f"classes {np.flatnonzero(counts == 0).tolist()} have no training samples")
    if ddof and np.any(counts <= ddof):
        raise EmptyClass(f"ddof={ddof} needs more than {ddof} samples per class")

    x = ds.features
    floor = var_smoothing * float(np.var(x, axis=0).max())
    if floor <= 0.0:
        # every feature constant: fall back to an absolute floor
        floor = var_smoothing

    means = np.empty((ds.k, ds.n_features))
    variances = np.empty((ds.k, ds.n_features))
    for c in range(ds.k):
        xc = x[ds.labels == c]
        means[c] = xc.mean(axis=0)
        variances[c] = xc.var(axis=0, ddof=ddof) + floor

    return GnbcParams(
        priors=counts / counts.sum(),
        means=means,
        variances=variances,
        class_names=ds.class_names,
        feature_names=ds.feature_names,
        feature_lo=x.min(axis=0),
        feature_hi=x.max(axis=0),
    )


def gaussian_log_pdf(x, mean, var):
    """Natural-log Gaussian density; broadcasts over array arguments."""
    var = np.asarray(var, dtype=np.float64)
    if np.any(var <= 0):
        raise NonPositiveVariance(f"variance must be positive, got {var}")
    d = np.asarray(x, dtype=np.float64) - mean
    with np.errstate(under="ignore"):
        out = -0.5 * (LOG_2PI + np.log(var)) - d * d / (2.0 * var)
    return float(out) if out.ndim == 0 else out


def log_posteriors(params, X):
    """Unnormalized natural-log posteriors, shape (samples, k)."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != params.n:
        raise DimensionMismatch(f"expected {params.n} features, got {X.shape[1]}")
    ll = gaussian_log_pdf(X[:, None, :], params.means[None], params.variances[None])
    return np.log(params.priors)[None, :] + ll.sum(axis=2)


def predict_float(params, sample):
    """Return ``(class, log_posteriors)`` for one sample; ties go to the lowest index."""
    sample = np.asarray(sample, dtype=np.float64)
    if sample.ndim != 1:
        raise DimensionMismatch("predict_float takes a single sample vector")
    lp = log_posteriors(params, sample)[0]
    return int(np.argmax(lp)), lp


def predict_batch(params, X):
    return np.argmax(log_posteriors(params, X), axis=1)


def accuracy(params, ds):
    return float(np.mean(predict_batch(params, ds.features) == ds.labels))


def save_model(params, path):
    d = params.to_json()
    validate(d, MODEL_SCHEMA, "model")
    Path(path).write_text(json.dumps(d, indent=2) + "\n", encoding="utf-8")


def load_model(path):
    return GnbcParams.from_json(json.loads(Path(path).read_text(encoding="utf-8")))
