"""JSON documents for systems.

Layout (``format_version`` "1")::

    {
      "format_version": "1",
      "factors":   [{"name": "alpha", "levels": ["1", "2"]}, ...],
      "variables": [{"name": "A", "outcomes": ["0", "1"], "numeric_values": [0, 1]}, ...],
      "diagram":   {"A": ["alpha"], ...},            # optional
      "treatments": [{"alpha": "1", "beta": "1"}, ...],
      "distributions": [[[["0", "0"], ".1"], ...], ...]
    }

``distributions[i]`` belongs to ``treatments[i]`` and lists ``[outcomes,
probability]`` cells; omitted cells are 0.  Probabilities given as strings
(``".1"``, ``"1/3"``) are exact; JSON numbers are read as floats.  Without a
diagram, variable ``i`` is paired with factor ``i``; with one, the system is
brought to bijective form by canonical rearrangement.
"""
from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Any, Mapping

from .model import (
    Factor,
    JointPmf,
    Probability,
    SelectiveInfluenceError,
    SelectiveSystem,
    Treatment,
    Variable,
    canonical_rearrangement,
)

FORMAT_VERSION = "1"


class DocumentError(SelectiveInfluenceError):
    pass


def _prob(value: Any):
    if isinstance(value, bool):
        raise DocumentError(f"bad probability {value!r}")
    if isinstance(value, str):
        try:
            return Probability(value)
        except (ValueError, ZeroDivisionError):
            raise DocumentError(f"bad probability string {value!r}") from None
    if isinstance(value, (int, float)):
        return float(value)
    raise DocumentError(f"bad probability {value!r}")


def _prob_out(value: Any):
    if isinstance(value, Probability):
        return value.literal
    if isinstance(value, Fraction):
        return str(value)
    return float(value)


def system_from_dict(doc: Mapping[str, Any]) -> SelectiveSystem:
    if not isinstance(doc, Mapping):
        raise DocumentError("system document must be a JSON object")
    version = str(doc.get("format_version", FORMAT_VERSION))
    if version != FORMAT_VERSION:
        raise DocumentError(f"unsupported format_version {version!r}")
    try:
        factors = tuple(Factor(f["name"], tuple(str(x) for x in f["levels"])) for f in doc["factors"])
        variables = tuple(
            Variable(v["name"], tuple(str(x) for x in v["outcomes"]), v.get("numeric_values"))
            for v in doc["variables"]
        )
        raw_t = doc["treatments"]
        raw_d = doc["distributions"]
    except (KeyError, TypeError) as e:
        raise DocumentError(f"malformed system document: missing or bad field {e}") from None
    if len(raw_t) != len(raw_d):
        raise DocumentError(f"{len(raw_t)} treatments but {len(raw_d)} distributions")
    vnames = tuple(v.name for v in variables)
    treatments = []
    dists = {}
    for assignment, cells in zip(raw_t, raw_d):
        if not isinstance(assignment, Mapping):
            raise DocumentError("each treatment must map factor names to levels")
        t = Treatment.of({str(k): str(v) for k, v in assignment.items()})
        table = {}
        for cell in cells:
            try:
                outcome, p = cell
            except (TypeError, ValueError):
                raise DocumentError(f"bad distribution cell {cell!r}; expected [outcomes, probability]") from None
            key = tuple(str(o) for o in outcome)
            if len(key) != len(vnames):
                raise DocumentError(f"outcome {list(key)} does not have {len(vnames)} entries")
            if key in table:
                raise DocumentError(f"duplicate cell {list(key)} at {t}")
            table[key] = _prob(p)
        if t in dists:
            raise DocumentError(f"duplicate treatment {t}")
        treatments.append(t)
        dists[t] = JointPmf(vnames, table)
    diagram = doc.get("diagram")
    if diagram is not None:
        return canonical_rearrangement(factors, variables, diagram, treatments, dists)
    return SelectiveSystem(factors, variables, tuple(treatments), dists)


def system_to_dict(system: SelectiveSystem) -> dict[str, Any]:
    variables = []
    for v in system.variables:
        entry: dict[str, Any] = {"name": v.name, "outcomes": list(v.outcomes)}
        if v.numeric_values is not None:
            entry["numeric_values"] = list(v.numeric_values)
        variables.append(entry)
    fnames = [f.name for f in system.factors]
    return {
        "format_version": FORMAT_VERSION,
        "factors": [{"name": f.name, "levels": list(f.levels)} for f in system.factors],
        "variables": variables,
        "treatments": [{f: t.level(f) for f in fnames} for t in system.treatments],
        "distributions": [
            [[list(k), _prob_out(p)] for k, p in system.pmf(t).items()] for t in system.treatments
        ],
    }


def loads(text: str) -> SelectiveSystem:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise DocumentError(f"invalid JSON: {e}") from None
    return system_from_dict(doc)


def dumps(system: SelectiveSystem, indent: int | None = 1) -> str:
    return json.dumps(system_to_dict(system), indent=indent, ensure_ascii=False) + "\n"


def load(path: str | Path) -> SelectiveSystem:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise DocumentError(f"cannot read {path}: {e.strerror}") from None
    return loads(text)


def dump(system: SelectiveSystem, path: str | Path) -> None:
    Path(path).write_text(dumps(system), encoding="utf-8")
