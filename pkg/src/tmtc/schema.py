"""Published JSON schemas for every machine-readable output.

These dicts are the normative contract for the JSONL corpus records and
for each subcommand's ``--json`` report envelope. The test suite
validates real outputs against them; downstream consumers may do the
same with any JSON-Schema (draft 2020-12) validator.
"""

from __future__ import annotations

_LABEL_PATTERN = r"^\$(KEEP|DELETE|APPEND_.+|REPLACE_.+)$"

TURN_RECORD_SCHEMA: dict = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "tmtc turn record",
    "type": "object",
    "required": ["origin_id", "turn", "strategy", "src", "tgt", "labels", "mask"],
    "additionalProperties": False,
    "properties": {
        "origin_id": {"type": "integer", "minimum": 0},
        "turn": {"type": "integer", "minimum": 0},
        "strategy": {"type": "string", "minLength": 1},
        "src": {"type": "array", "items": {"type": "string", "minLength": 1}},
        "tgt": {"type": "array", "items": {"type": "string", "minLength": 1}},
        "labels": {
            "type": "array",
            "items": {"type": "string", "pattern": _LABEL_PATTERN},
        },
        "mask": {"type": "array", "items": {"type": "integer", "enum": [0, 1]}},
        "sentinel": {"const": True},
    },
}

RUN_CONFIG_SCHEMA: dict = {
    "type": "object",
    "required": [
        "subcommand",
        "inputs",
        "strategy",
        "seed",
        "beta",
        "annotator",
        "workers",
        "flags",
    ],
    "additionalProperties": False,
    "properties": {
        "subcommand": {"type": "string"},
        "inputs": {"type": "object", "additionalProperties": {"type": "string"}},
        "strategy": {"type": ["string", "null"]},
        "seed": {"type": "integer", "minimum": 0},
        "beta": {"type": "number", "exclusiveMinimum": 0},
        "annotator": {"type": "integer", "minimum": 0},
        "workers": {"type": "integer", "minimum": 1},
        "flags": {
            "type": "object",
            "required": [
                "include_original",
                "invert_typefirst",
                "kind_only",
                "sentinel",
            ],
            "additionalProperties": False,
            "properties": {
                "include_original": {"type": "boolean"},
                "invert_typefirst": {"type": "boolean"},
                "kind_only": {"type": "boolean"},
                "sentinel": {"type": "boolean"},
            },
        },
    },
}

_STATS_BODY = {
    "type": "object",
    "required": [
        "records",
        "originals",
        "additional_instances",
        "origins",
        "eligible_origins",
        "per_strategy",
        "per_turn",
        "label_frequencies",
        "mask_zero_rate",
    ],
    "additionalProperties": False,
    "properties": {
        "records": {"type": "integer", "minimum": 0},
        "originals": {"type": "integer", "minimum": 0},
        "additional_instances": {"type": "integer", "minimum": 0},
        "origins": {"type": "integer", "minimum": 0},
        "eligible_origins": {"type": "integer", "minimum": 0},
        "per_strategy": {
            "type": "object",
            "additionalProperties": {"type": "integer", "minimum": 0},
        },
        "per_turn": {
            "type": "object",
            "additionalProperties": {"type": "integer", "minimum": 0},
        },
        "label_frequencies": {
            "type": "object",
            "required": ["$KEEP", "$DELETE", "$APPEND", "$REPLACE"],
            "additionalProperties": False,
            "properties": {
                "$KEEP": {"type": "integer", "minimum": 0},
                "$DELETE": {"type": "integer", "minimum": 0},
                "$APPEND": {"type": "integer", "minimum": 0},
                "$REPLACE": {"type": "integer", "minimum": 0},
            },
        },
        "mask_zero_rate": {"type": "number", "minimum": 0, "maximum": 1},
    },
}

STATS_REPORT_SCHEMA: dict = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "tmtc stats report",
    "type": "object",
    "required": ["config", "stats"],
    "additionalProperties": False,
    "properties": {"config": RUN_CONFIG_SCHEMA, "stats": _STATS_BODY},
}

_KIND_SCORE = {
    "type": "object",
    "required": ["tp", "fp", "fn", "num_gold", "precision", "recall", "f"],
    "additionalProperties": False,
    "properties": {
        "tp": {"type": "integer", "minimum": 0},
        "fp": {"type": "integer", "minimum": 0},
        "fn": {"type": "integer", "minimum": 0},
        "num_gold": {"type": "integer", "minimum": 0},
        "precision": {"type": "number", "minimum": 0, "maximum": 100},
        "recall": {"type": "number", "minimum": 0, "maximum": 100},
        "f": {"type": "number", "minimum": 0, "maximum": 100},
    },
}

_EVAL_BODY = {
    "type": "object",
    "required": ["beta", "kinds"],
    "additionalProperties": False,
    "properties": {
        "beta": {"type": "number", "exclusiveMinimum": 0},
        "kinds": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "append": _KIND_SCORE,
                "delete": _KIND_SCORE,
                "replace": _KIND_SCORE,
            },
        },
    },
}

EVAL_REPORT_SCHEMA: dict = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "tmtc eval report",
    "type": "object",
    "required": ["config", "report"],
    "additionalProperties": False,
    "properties": {"config": RUN_CONFIG_SCHEMA, "report": _EVAL_BODY},
}

_QUANTEXP_PAIR = {
    "type": "object",
    "required": ["raw", "checked", "delta_precision", "delta_recall", "delta_f"],
    "additionalProperties": False,
    "properties": {
        "raw": _KIND_SCORE,
        "checked": _KIND_SCORE,
        "delta_precision": {"type": "number"},
        "delta_recall": {"type": "number"},
        "delta_f": {"type": "number"},
    },
}

QUANTEXP_REPORT_SCHEMA: dict = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "tmtc quantexp report",
    "type": "object",
    "required": ["config", "report"],
    "additionalProperties": False,
    "properties": {
        "config": RUN_CONFIG_SCHEMA,
        "report": {
            "type": "object",
            "required": ["action", "beta", "subset_size", "kinds"],
            "additionalProperties": False,
            "properties": {
                "action": {"type": "string", "enum": ["append", "delete", "replace"]},
                "beta": {"type": "number", "exclusiveMinimum": 0},
                "subset_size": {"type": "integer", "minimum": 0},
                "kinds": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {
                        "append": _QUANTEXP_PAIR,
                        "delete": _QUANTEXP_PAIR,
                        "replace": _QUANTEXP_PAIR,
                    },
                },
            },
        },
    },
}

LOSS_REPORT_SCHEMA: dict = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "tmtc loss report",
    "type": "object",
    "required": ["config", "report"],
    "additionalProperties": False,
    "properties": {
        "config": RUN_CONFIG_SCHEMA,
        "report": {
            "type": "object",
            "required": ["records", "l_d", "l_c", "l_c1", "l_c2", "l_total"],
            "additionalProperties": False,
            "properties": {
                "records": {"type": "integer", "minimum": 0},
                "l_d": {"type": "number", "minimum": 0},
                "l_c": {"type": "number", "minimum": 0},
                "l_c1": {"type": "number", "minimum": 0},
                "l_c2": {"type": "number", "minimum": 0},
                "l_total": {"type": "number", "minimum": 0},
            },
        },
    },
}

REPORT_SCHEMAS: dict[str, dict] = {
    "stats": STATS_REPORT_SCHEMA,
    "eval": EVAL_REPORT_SCHEMA,
    "quantexp": QUANTEXP_REPORT_SCHEMA,
    "loss": LOSS_REPORT_SCHEMA,
}
