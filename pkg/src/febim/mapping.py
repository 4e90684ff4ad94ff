"""Probability-to-cell mapping.

Pipeline: equal-width feature bins -> per-bin class likelihoods -> log ->
truncation -> per-column shift so each column peaks at 1 (P') -> uniform
quantization to L cell states -> linear drain-current levels.
"""

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import log_ndtr

from .errors import AllZeroColumn, ConfigError, DimensionMismatch, MalformedTable
from .gnbc import gaussian_log_pdf
from .schemas import MAPPED_SCHEMA, PULSE_TABLE_SCHEMA, validate

UNIFORM_PRIOR_TOL = 1e-9


@dataclass(frozen=True)
class QuantSpec:
    """Quantization and current-mapping parameters.

    ``range_decades`` is the truncation depth R in units of the log base:
    anything more than R below a column's maximum is clipped, so P' spans
    ``[1 - R, 1]``. ``math.inf`` disables truncation (quantization then
    becomes undefined).
    """

    q_f: int = 4
    q_l: int = 2
    log_base: float = 10.0
    range_decades: float = 3.0
    i_min: float = 0.1   # µA
    i_max: float = 1.0   # µA
    likelihood_mode: str = "integrated"

    def __post_init__(self):
        if self.q_f < 1 or self.q_l < 1:
            raise ConfigError("q_f and q_l must be >= 1 bit")
        if not self.log_base > 1:
            raise ConfigError("log_base must be > 1")
        if not self.range_decades > 0:
            raise ConfigError("range_decades must be > 0")
        if not self.i_max > self.i_min > 0:
            raise ConfigError("need i_max > i_min > 0")
        if self.likelihood_mode not in ("center", "integrated"):
            raise ConfigError(f"unknown likelihood_mode {self.likelihood_mode!r}")

    @property
    def m(self):
        return 2 ** self.q_f

    @property
    def levels(self):
        return 2 ** self.q_l

    def to_json(self):
        r = self.range_decades
        return {
            "q_f": self.q_f, "q_l": self.q_l, "log_base": self.log_base,
            "range_decades": "inf" if math.isinf(r) else r,
            "i_min": self.i_min, "i_max": self.i_max,
            "likelihood_mode": self.likelihood_mode,
        }

    @classmethod
    def from_json(cls, d):
        d = dict(d)
        d["range_decades"] = float(d["range_decades"])
        return cls(**d)


@dataclass(frozen=True, eq=False)
class BinSpec:
    lo: np.ndarray
    hi: np.ndarray
    m: int

    def __post_init__(self):
        if self.m < 2:
            raise ConfigError("need at least 2 feature levels")
        if np.any(self.hi < self.lo):
            raise ConfigError("bin upper edge below lower edge")

    @property
    def n(self):
        return self.lo.shape[0]

    @property
    def degenerate(self):
        return self.hi == self.lo

    @property
    def width(self):
        # constant features get width 1; discretize sends them all to bin 0
        return np.where(self.degenerate, 1.0, (self.hi - self.lo) / self.m)

    def centers(self):
        """Bin centers, shape (n, m). Degenerate features use ``lo`` for every bin."""
        j = np.arange(self.m) + 0.5
        c = self.lo[:, None] + j[None, :] * self.width[:, None]
        return np.where(self.degenerate[:, None], self.lo[:, None], c)

    def edges(self):
        """Inner edges widened to +-inf at the ends, shape (n, m + 1)."""
        j = np.arange(self.m + 1)
        e = self.lo[:, None] + j[None, :] * self.width[:, None]
        e[:, 0] = -np.inf
        e[:, -1] = np.inf
        return e

    def to_json(self):
        return {"lo": self.lo.tolist(), "hi": self.hi.tolist(), "m": self.m}

    @classmethod
    def from_json(cls, d):
        return cls(np.array(d["lo"], dtype=np.float64), np.array(d["hi"], dtype=np.float64), int(d["m"]))


def fit_bins(train, m):
    """Equal-width bins spanning each training feature's [min, max]."""
    x = train.features
    return BinSpec(x.min(axis=0), x.max(axis=0), int(m))


def discretize(bins, x):
    """Bin index for each feature; accepts one sample (n,) or a batch (s, n)."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != bins.n:
        raise DimensionMismatch(f"expected {bins.n} features, got {x.shape[-1]}")
    idx = np.floor((x - bins.lo) / bins.width)
    idx = np.clip(idx, 0, bins.m - 1).astype(np.int64)
    return np.where(bins.degenerate, 0, idx)


def tabulate_log_likelihoods(params, bins, mode="center"):
    """Natural-log likelihood of each (feature, bin) under each class, shape (n, m, k).

    ``center`` evaluates the density at the bin center; ``integrated`` uses
    the probability mass of the bin, with the end bins open to +-inf.
    """
    if params.n != bins.n:
        raise DimensionMismatch(f"model has {params.n} features, bins have {bins.n}")
    mu = params.means.T[:, None, :]          # (n, 1, k)
    var = params.variances.T[:, None, :]
    if mode == "center":
        return gaussian_log_pdf(bins.centers()[:, :, None], mu, var)
    if mode == "integrated":
        sd = np.sqrt(var)
        e = bins.edges()
        a = (e[:, :-1, None] - mu) / sd
        b = (e[:, 1:, None] - mu) / sd
        return _log_normal_mass(a, b)
    raise ConfigError(f"unknown likelihood mode {mode!r}")


def _log_normal_mass(a, b):
    """log(Phi(b) - Phi(a)) for a < b, using the upper tail when both are positive."""
    flip = a > 0
    lo = np.where(flip, -b, a)
    hi = np.where(flip, -a, b)
    lhi = log_ndtr(hi)
    llo = log_ndtr(lo)
    with np.errstate(divide="ignore", under="ignore"):
        return lhi + np.log1p(-np.exp(llo - lhi))


def tabulate_likelihoods(params, bins, mode="center"):
    """Raw likelihood tensor (n, m, k) in linear units."""
    with np.errstate(under="ignore"):
        return np.exp(tabulate_log_likelihoods(params, bins, mode))


def _to_base(ln_values, base):
    return np.asarray(ln_values, dtype=np.float64) / math.log(base)


def normalize_log_columns(log_values, range_decades, axis=-1):
    """Shift columns of log-base values so each column's maximum is exactly 1.

    Entries more than ``range_decades`` below the column maximum are clipped
    to that floor first. Equivalent to flooring the raw probabilities at
    ``max * base**-R`` before taking logs.
    """
    lv = np.asarray(log_values, dtype=np.float64)
    top = lv.max(axis=axis, keepdims=True)
    if np.any(np.isneginf(top)) or np.any(np.isnan(top)):
        raise AllZeroColumn("column has no positive probability")
    rel = lv - top
    if not math.isinf(range_decades):
        rel = np.maximum(rel, -range_decades)
    return 1.0 + rel


def normalize_column(raw, spec):
    """Truncate, log-convert and max-normalize one column of raw probabilities."""
    raw = np.asarray(raw, dtype=np.float64)
    if raw.size == 0 or not np.any(raw > 0):
        raise AllZeroColumn(f"column {raw.tolist()} has no positive entry")
    with np.errstate(divide="ignore"):
        if spec.log_base == 10:
            lv = np.log10(raw)
        elif spec.log_base == 2:
            lv = np.log2(raw)
        else:
            lv = np.log(raw) / math.log(spec.log_base)
    return normalize_log_columns(lv, spec.range_decades)


def quantize(p_prime, spec):
    """Uniform round-half-up quantization of P' in [1-R, 1] to states 0..L-1."""
    if math.isinf(spec.range_decades):
        raise ConfigError("quantization needs a finite range_decades")
    top = spec.levels - 1
    t = 1.0 + (np.asarray(p_prime, dtype=np.float64) - 1.0) / spec.range_decades
    q = np.clip(np.floor(t * top + 0.5), 0, top).astype(np.int64)
    return int(q) if q.ndim == 0 else q


def level_grid(spec):
    """P' value represented by each state."""
    return 1.0 - spec.range_decades * (1.0 - np.arange(spec.levels) / (spec.levels - 1))


def state_to_current(q, spec):
    """Linear map from state index to drain current in µA, exact at both ends."""
    t = np.asarray(q, dtype=np.float64) / (spec.levels - 1)
    i = spec.i_min * (1.0 - t) + spec.i_max * t
    return float(i) if i.ndim == 0 else i


def identity_pulse_table(levels):
    return list(range(levels))


def validate_pulse_table(table, levels):
    table = list(table)
    if len(table) != levels:
        raise MalformedTable(f"pulse table has {len(table)} entries, need {levels}")
    if any(not isinstance(v, int) or isinstance(v, bool) or v < 0 for v in table):
        raise MalformedTable("pulse counts must be non-negative integers")
    if any(b <= a for a, b in zip(table, table[1:])):
        raise MalformedTable(f"pulse table must be strictly increasing: {table}")
    return table


def programming_schedule(q, table):
    """Gate pulses after a full erase needed to reach state ``q``."""
    validate_pulse_table(table, len(table))
    q = np.asarray(q)
    if np.any(q < 0) or np.any(q >= len(table)):
        raise MalformedTable(f"state outside table of length {len(table)}")
    out = np.asarray(table, dtype=np.int64)[q]
    return int(out) if out.ndim == 0 else out


def load_pulse_table(path, levels):
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"pulse table not found: {path}")
    try:
        table = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise MalformedTable(f"{path}: not valid JSON ({e})") from None
    try:
        validate(table, PULSE_TABLE_SCHEMA, "pulse table")
    except Exception as e:
        raise MalformedTable(str(e)) from None
    return validate_pulse_table(table, levels)


@dataclass(frozen=True, eq=False)
class MappedModel:
    prior_col: np.ndarray     # (k,) P'
    lik_cols: np.ndarray      # (n, m, k) P'
    q_states: np.ndarray      # (n, m, k) int
    prior_states: np.ndarray  # (k,) int
    bins: BinSpec
    spec: QuantSpec
    uniform_prior: bool
    class_names: tuple = field(default=())
    feature_names: tuple = field(default=())

    @property
    def k(self):
        return self.prior_col.shape[0]

    @property
    def n(self):
        return self.lik_cols.shape[0]

    @property
    def m(self):
        return self.lik_cols.shape[1]

    def state_scores(self, evidence_bins):
        """Sum of selected quantized states per class; (k,) or (s, k) for a batch."""
        eb = np.asarray(evidence_bins)
        feat = np.arange(self.n)
        return self.q_states[feat, eb].sum(axis=-2) + self.prior_states

    def pprime_scores(self, evidence_bins):
        eb = np.asarray(evidence_bins)
        feat = np.arange(self.n)
        return self.lik_cols[feat, eb].sum(axis=-2) + self.prior_col

    def predict_quantized(self, X):
        """Software argmax over quantized scores for raw feature rows."""
        return np.argmax(self.state_scores(discretize(self.bins, X)), axis=-1)

    def to_json(self):
        return {
            "spec": self.spec.to_json(),
            "bins": self.bins.to_json(),
            "prior_col": self.prior_col.tolist(),
            "lik_cols": self.lik_cols.tolist(),
            "q_states": self.q_states.tolist(),
            "prior_states": self.prior_states.tolist(),
            "uniform_prior": bool(self.uniform_prior),
            "class_names": list(self.class_names),
            "feature_names": list(self.feature_names),
        }

    @classmethod
    def from_json(cls, d):
        validate(d, MAPPED_SCHEMA, "mapped model")
        return cls(
            prior_col=np.array(d["prior_col"], dtype=np.float64),
            lik_cols=np.array(d["lik_cols"], dtype=np.float64),
            q_states=np.array(d["q_states"], dtype=np.int64),
            prior_states=np.array(d["prior_states"], dtype=np.int64),
            bins=BinSpec.from_json(d["bins"]),
            spec=QuantSpec.from_json(d["spec"]),
            uniform_prior=bool(d["uniform_prior"]),
            class_names=tuple(d.get("class_names", ())),
            feature_names=tuple(d.get("feature_names", ())),
        )


def map_with_bins(params, bins, spec):
    if bins.m != spec.m:
        raise ConfigError(f"bins have {bins.m} levels but q_f={spec.q_f} needs {spec.m}")
    ln_lik = tabulate_log_likelihoods(params, bins, spec.likelihood_mode)
    lik = normalize_log_columns(_to_base(ln_lik, spec.log_base), spec.range_decades, axis=-1)
    prior = normalize_log_columns(_to_base(np.log(params.priors), spec.log_base), spec.range_decades)
    uniform = bool(np.ptp(params.priors) <= UNIFORM_PRIOR_TOL)
    return MappedModel(
        prior_col=prior,
        lik_cols=lik,
        q_states=quantize(lik, spec),
        prior_states=quantize(prior, spec),
        bins=bins,
        spec=spec,
        uniform_prior=uniform,
        class_names=params.class_names,
        feature_names=params.feature_names,
    )


def map_model(params, train, spec):
    """Map a trained model onto P' tables and cell states.

    ``train`` supplies the bin ranges; pass ``None`` to use the range stored
    in ``params`` at training time.
    """
    if train is not None:
        bins = fit_bins(train, spec.m)
    elif params.feature_lo is not None:
        bins = BinSpec(params.feature_lo, params.feature_hi, spec.m)
    else:
        raise ConfigError("no training data and no stored feature range to fit bins")
    return map_with_bins(params, bins, spec)


def save_mapped(mapped, path):
    d = mapped.to_json()
    validate(d, MAPPED_SCHEMA, "mapped model")
    Path(path).write_text(json.dumps(d, indent=2) + "\n", encoding="utf-8")


def load_mapped(path):
    return MappedModel.from_json(json.loads(Path(path).read_text(encoding="utf-8")))
