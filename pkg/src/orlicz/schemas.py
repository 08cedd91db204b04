"""JSON Schemas for the ``--format json`` output of each subcommand.

These documents are the stable machine interface.  Numbers that may be
infinite are written as the string ``"inf"``.
"""

from __future__ import annotations

_NUM = {"anyOf": [{"type": "number"}, {"enum": ["inf", "-inf", "nan"]}]}
_OPT_NUM = {"anyOf": [_NUM, {"type": "null"}]}


def _obj(props: dict, required=None) -> dict:
    return {
        "type": "object",
        "properties": props,
        "required": list(required or props),
        "additionalProperties": False,
    }


OMINUS = _obj({
    "phi": {"type": "string"},
    "phi1": {"type": "string"},
    "truncation": _NUM,
    "domain_convention": {"enum": ["open_at_b", "closed_at_b", "unbounded"]},
    "fallback": {"type": "boolean"},
    "rows": {"type": "array", "items": _obj({"u": _NUM, "value": _NUM, "argmax": _NUM})},
})

RESOLVE = _obj({
    "phi": {"type": "string"},
    "phi1": {"type": "string"},
    "classification": {"enum": ["trivial", "inside_linfty", "general"]},
    "triviality": {"enum": ["trivial_zero", "bounded_by_linfty", "no_restriction"]},
    "summary": {"type": "string"},
    "embed_const": _NUM,
    "reverse_const": _OPT_NUM,
    "b_generator": _NUM,
    "growth_exponent": _OPT_NUM,
})

FACTORIZE = _obj({
    "phi": {"type": "string"},
    "phi1": {"type": "string"},
    "phi2": {"type": "string"},
    "measure": {"enum": ["finite", "infinite"]},
    "mode": {"enum": ["all", "large"]},
    "verdict": {"type": "boolean"},
    "c": _NUM,
    "C": _NUM,
    "spread": _NUM,
    "u0": _NUM,
    "diagnostic": {"type": "string"},
    "excluded": {"type": "array", "items": _NUM},
    "trace": {"type": "array", "items": _obj({"u": _NUM, "ratio": _NUM})},
})

NORM = _obj({"phi": {"type": "string"}, "norm": _NUM, "modular": _NUM})

VERIFY = _obj({
    "seed": {"type": "integer"},
    "passed": {"type": "boolean"},
    "suites": {
        "type": "array",
        "items": _obj({
            "name": {"type": "string"},
            "passed": {"type": "boolean"},
            "checks": {"type": "integer"},
            "violations": {"type": "integer"},
            "detail": {"type": "string"},
        }),
    },
})

SCHEMAS = {"ominus": OMINUS, "resolve": RESOLVE, "factorize": FACTORIZE, "norm": NORM, "verify": VERIFY}
