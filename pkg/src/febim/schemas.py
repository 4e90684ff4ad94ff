"""JSON schemas for every artifact the package writes or reads."""

import jsonschema

from .errors import SchemaError

REPORT_SCHEMA_ID = "febim-report/1"

_num = {"type": "number"}
_vec = {"type": "array", "items": _num}
_mat = {"type": "array", "items": _vec}
_str_list = {"type": "array", "items": {"type": "string"}}

MODEL_SCHEMA = {
    "type": "object",
    "required": ["priors", "means", "variances", "class_names", "feature_names"],
    "properties": {
        "priors": {**_vec, "minItems": 1},
        "means": _mat,
        "variances": _mat,
        "class_names": _str_list,
        "feature_names": _str_list,
        "feature_lo": _vec,
        "feature_hi": _vec,
    },
}

QUANT_SPEC_SCHEMA = {
    "type": "object",
    "required": ["q_f", "q_l", "log_base", "range_decades", "i_min", "i_max"],
    "properties": {
        "q_f": {"type": "integer", "minimum": 1},
        "q_l": {"type": "integer", "minimum": 1},
        "log_base": {"type": "number", "exclusiveMinimum": 1},
        "range_decades": {"type": ["number", "string"]},
        "i_min": {"type": "number", "exclusiveMinimum": 0},
        "i_max": {"type": "number", "exclusiveMinimum": 0},
        "likelihood_mode": {"enum": ["center", "integrated"]},
    },
}

MAPPED_SCHEMA = {
    "type": "object",
    "required": ["spec", "bins", "prior_col", "lik_cols", "q_states", "prior_states", "uniform_prior"],
    "properties": {
        "spec": QUANT_SPEC_SCHEMA,
        "bins": {
            "type": "object",
            "required": ["lo", "hi", "m"],
            "properties": {"lo": _vec, "hi": _vec, "m": {"type": "integer", "minimum": 2}},
        },
        "prior_col": _vec,
        "lik_cols": {"type": "array", "items": _mat},
        "q_states": {"type": "array", "items": {"type": "array", "items": {"type": "array", "items": {"type": "integer"}}}},
        "prior_states": {"type": "array", "items": {"type": "integer"}},
        "uniform_prior": {"type": "boolean"},
        "class_names": _str_list,
        "feature_names": _str_list,
    },
}

CROSSBAR_SCHEMA = {
    "type": "object",
    "required": ["geometry", "states", "pulse_schedule", "device_model"],
    "properties": {
        "geometry": {
            "type": "object",
            "required": ["k", "n", "m", "levels", "has_prior_col", "rows", "cols"],
            "properties": {
                "k": {"type": "integer", "minimum": 1},
                "n": {"type": "integer", "minimum": 1},
                "m": {"type": "integer", "minimum": 2},
                "levels": {"type": "integer", "minimum": 2},
                "has_prior_col": {"type": "boolean"},
                "rows": {"type": "integer"},
                "cols": {"type": "integer"},
            },
        },
        "states": {"type": "array", "items": {"type": "array", "items": {"type": "integer", "minimum": 0}}},
        "pulse_schedule": {"type": "array", "items": {"type": "array", "items": {"type": "integer", "minimum": 0}}},
        "device_model": {
            "type": "object",
            "required": ["i_min", "i_max", "sigma_vth", "memory_window"],
        },
    },
}

_record = {
    "type": "object",
    "required": ["q_f", "q_l", "sigma_vth", "mean_acc", "std_acc", "per_epoch_acc",
                 "baseline_mean_acc", "delta_acc"],
    "properties": {
        "q_f": {"type": "integer"},
        "q_l": {"type": "integer"},
        "sigma_vth": _num,
        "mean_acc": _num,
        "std_acc": _num,
        "per_epoch_acc": _vec,
        "per_epoch_quantized_acc": _vec,
        "per_epoch_baseline_acc": _vec,
        "baseline_mean_acc": _num,
        "quantized_mean_acc": _num,
        "delta_acc": _num,
        "within_1pct": {"type": "boolean"},
    },
}

REPORT_SCHEMA = {
    "type": "object",
    "required": ["schema", "kind", "dataset", "metadata", "records"],
    "properties": {
        "schema": {"const": REPORT_SCHEMA_ID},
        "kind": {"enum": ["quant_sweep", "variation_sweep"]},
        "dataset": {"type": "string"},
        "metadata": {
            "type": "object",
            "required": ["config", "config_hash", "seed", "version"],
        },
        "records": {"type": "array", "items": _record},
        "notes": _str_list,
    },
}

PULSE_TABLE_SCHEMA = {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 2}


def validate(doc, schema, what):
    try:
        jsonschema.validate(doc, schema)
    except jsonschema.ValidationError as e:
        path = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise SchemaError(f"invalid {what} JSON at {path}: {e.message}") from None
