"""Behavioral model of the multi-level-cell crossbar and its winner-take-all sense stage.

Rows are events (classes), columns are an optional prior column followed by
``n`` blocks of ``m`` likelihood columns. Reading a sample activates one
column per block (plus the prior column); inhibited cells contribute zero
current. Each row's accumulated current is a log-posterior score and the
WTA stage picks the largest.
"""

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import mapping
from .errors import BinOutOfRange, DimensionMismatch
from .schemas import CROSSBAR_SCHEMA, validate

# currents closer than this (µA) are treated as equal by the WTA stage;
# absorbs float summation-order noise so exact-state ties stay ties
TIE_ATOL = 1e-9


@dataclass(frozen=True)
class DeviceModel:
    """Read-current model with threshold-voltage variation.

    A V_TH shift moves the read current by ``-g * dV``. When ``sensitivity``
    is None, ``g = (i_max - i_min) / memory_window``. The voltages are the
    nominal operating points and are not simulated electrically.
    """

    i_min: float = 0.1            # µA
    i_max: float = 1.0            # µA
    sigma_vth: float = 0.0        # V
    memory_window: float = 1.8    # V
    sensitivity: float | None = None  # µA/V
    wta_delta: float = 0.0        # µA
    v_on: float = 0.5
    v_off: float = -0.5
    v_w: float = 4.0

    def __post_init__(self):
        if self.sigma_vth < 0:
            raise ValueError("sigma_vth must be >= 0")
        if self.memory_window <= 0:
            raise ValueError("memory_window must be > 0")
        if self.sensitivity is not None and self.sensitivity < 0:
            raise ValueError("sensitivity must be >= 0")
        if self.wta_delta < 0:
            raise ValueError("wta_delta must be >= 0")

    @property
    def g(self):
        if self.sensitivity is not None:
            return self.sensitivity
        return (self.i_max - self.i_min) / self.memory_window

    def to_json(self):
        return asdict(self)


@dataclass(frozen=True, eq=False)
class CrossbarImage:
    k: int
    n: int
    m: int
    levels: int
    has_prior_col: bool
    states: np.ndarray             # (k, cols) int
    nominal_currents: np.ndarray   # (k, cols) µA
    i_min: float = 0.1
    i_max: float = 1.0

    @property
    def cols(self):
        return int(self.has_prior_col) + self.n * self.m

    def to_json(self, device=None, pulse_table=None):
        table = pulse_table or mapping.identity_pulse_table(self.levels)
        return {
            "geometry": {"k": self.k, "n": self.n, "m": self.m, "levels": self.levels,
                         "has_prior_col": bool(self.has_prior_col), "rows": self.k, "cols": self.cols},
            "states": self.states.tolist(),
            "pulse_schedule": mapping.programming_schedule(self.states, table).tolist(),
            "pulse_table": list(table),
            "device_model": (device or DeviceModel(i_min=self.i_min, i_max=self.i_max)).to_json(),
        }

    @classmethod
    def from_json(cls, d):
        validate(d, CROSSBAR_SCHEMA, "crossbar image")
        g = d["geometry"]
        dev = d["device_model"]
        states = np.array(d["states"], dtype=np.int64)
        return _build_image(g["k"], g["n"], g["m"], g["levels"], g["has_prior_col"], states,
                            dev["i_min"], dev["i_max"])


def _build_image(k, n, m, levels, has_prior, states, i_min, i_max):
    states = np.asarray(states, dtype=np.int64)
    cols = int(has_prior) + n * m
    if states.shape != (k, cols):
        raise DimensionMismatch(f"states shape {states.shape} != ({k}, {cols})")
    if states.min() < 0 or states.max() >= levels:
        raise ValueError(f"states must lie in [0, {levels - 1}]")
    t = states / (levels - 1)
    currents = i_min * (1.0 - t) + i_max * t
    states.setflags(write=False)
    currents.setflags(write=False)
    return CrossbarImage(k, n, m, levels, bool(has_prior), states, currents, i_min, i_max)


def program(model):
    """Lay out a mapped model's states on the array.

    The prior column is dropped when the priors are uniform, since it adds
    the same current to every row.
    """
    n, m, k = model.q_states.shape
    blocks = model.q_states.transpose(2, 0, 1).reshape(k, n * m)
    has_prior = not model.uniform_prior
    states = np.concatenate([model.prior_states[:, None], blocks], axis=1) if has_prior else blocks
    return _build_image(k, n, m, model.spec.levels, has_prior, states.copy(),
                        model.spec.i_min, model.spec.i_max)


def activation(image, evidence_bins):
    """Column indices driven at V_on: the prior column (if any) and one per block."""
    eb = np.asarray(evidence_bins, dtype=np.int64)
    if eb.shape[-1] != image.n:
        raise DimensionMismatch(f"expected {image.n} evidence values, got {eb.shape[-1]}")
    if np.any(eb < 0) or np.any(eb >= image.m):
        raise BinOutOfRange(f"evidence bins must lie in [0, {image.m - 1}]")
    off = int(image.has_prior_col)
    cols = off + np.arange(image.n) * image.m + eb
    if image.has_prior_col:
        cols = np.concatenate([np.zeros(eb.shape[:-1] + (1,), dtype=np.int64), cols], axis=-1)
    return cols


def cell_currents(image, noise=None):
    """Per-cell read current with perturbation applied and clamped at zero."""
    if noise is None:
        return image.nominal_currents
    noise = np.asarray(noise, dtype=np.float64)
    if noise.shape != image.nominal_currents.shape:
        raise DimensionMismatch(f"noise shape {noise.shape} != {image.nominal_currents.shape}")
    return np.maximum(0.0, image.nominal_currents + noise)


def row_currents(image, active, noise=None):
    """Accumulated wordline current(s).

    ``active`` is one column set (a,) giving (k,) currents, or a batch (s, a)
    giving (s, k).
    """
    active = np.asarray(active, dtype=np.int64)
    cells = cell_currents(image, noise)
    return cells[:, active].sum(axis=-1).T


def perturb(image, dev, rng_seed):
    """Current perturbation matrix for one programming event.

    Each cell draws an independent V_TH shift ~ N(0, sigma_vth^2); a higher
    threshold lowers the read current, hence the sign.
    """
    shape = image.nominal_currents.shape
    if dev.sigma_vth == 0:
        return np.zeros(shape)
    rng = np.random.default_rng(rng_seed)
    dv = rng.normal(0.0, dev.sigma_vth, size=shape)
    return -dev.g * dv


def wta_select(currents, delta=0.0, atol=TIE_ATOL):
    """Pick the row with maximum current.

    Returns ``(winner, ambiguous)``; rows within ``atol`` of the maximum tie
    and the lowest index wins. ``ambiguous`` means the runner-up sits within
    ``delta`` of the winner (or ties it). Batched input (s, k) returns arrays.
    """
    cur = np.asarray(currents, dtype=np.float64)
    top = cur.max(axis=-1, keepdims=True)
    near = cur >= top - atol
    winner = np.argmax(near, axis=-1)
    if cur.shape[-1] == 1:
        ambiguous = np.zeros(winner.shape, dtype=bool)
    else:
        rest = np.where(np.arange(cur.shape[-1]) == winner[..., None], -np.inf, cur)
        gap = top[..., 0] - rest.max(axis=-1)
        ambiguous = gap <= max(delta, atol)
    if cur.ndim == 1:
        return int(winner), bool(ambiguous)
    return winner, ambiguous


@dataclass(frozen=True, eq=False)
class InferenceTrace:
    activated_columns: np.ndarray
    row_currents: np.ndarray
    winner: int
    ambiguous: bool


def infer(image, dev, evidence_bins, noise=None):
    """One read: activate columns, accumulate row currents, run WTA."""
    active = activation(image, evidence_bins)
    cur = row_currents(image, active, noise)
    winner, ambiguous = wta_select(cur, dev.wta_delta)
    return InferenceTrace(active, cur, winner, ambiguous)


def infer_batch(image, dev, evidence_bins, noise=None):
    """Vectorized ``infer`` over rows of ``evidence_bins``: (winners, ambiguous, currents)."""
    active = activation(image, np.atleast_2d(evidence_bins))
    cur = row_currents(image, active, noise)
    winner, ambiguous = wta_select(cur, dev.wta_delta)
    return winner, ambiguous, cur


def save_image(image, path, device=None, pulse_table=None):
    d = image.to_json(device, pulse_table)
    validate(d, CROSSBAR_SCHEMA, "crossbar image")
    Path(path).write_text(json.dumps(d, indent=2) + "\n", encoding="utf-8")


def load_image(path):
    """Returns ``(image, device_model, pulse_table)``."""
    d = json.loads(Path(path).read_text(encoding="utf-8"))
    image = CrossbarImage.from_json(d)
    device = DeviceModel(**d["device_model"])
    return image, device, d.get("pulse_table", mapping.identity_pulse_table(image.levels))
