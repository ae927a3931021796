"""Declarative netlist documents: parsing, validation, serialization and build.

A document is strict JSON::

    {
      "blocks":  {"<name>": {"kind": ..., "params": {...}, "operating_point": {...}}},
      "loops":   [{"converter": ..., "controller": ..., "target": "v_out" | "state:<label>",
                   "ctl": "<control label>", "sense": "terminal" | "states"}],
      "cascade": ["<source>", ..., "<load>"],
      "order":   "loops_first" | "cascade_first"
    }

``sense`` and ``order`` are optional.  All numbers are SI.

``order`` selects whether loops are closed on each converter before the
cascade is connected (default) or on the connected cascade.  In the second
case a ``v_out`` target means the cascade's output voltage, so it is only
accepted for a converter followed by nothing but resistors.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

import jsonschema

from . import blocks as bk
from .compose import (
    OutputVoltage,
    StateTarget,
    attach_controller_open_loop,
    cascade as cascade_blocks,
    close_loop,
    feedback_gain,
)
from .errors import BadIndex, ParseError, SchemaViolation, UnresolvedRef
from .model import StateSpaceBlock

TWO_PORT_KINDS = ("resistor", "lc_filter", "boost_ccm", "buck_ccm")
CONTROLLER_KINDS = ("controller_type1", "controller_type2", "controller_type3")
ORDERS = ("loops_first", "cascade_first")
SENSES = ("terminal", "states")

# kind -> (required params, optional params); controller corners may be given
# as a time constant T_x [s] or a frequency f_x [Hz].  f_sw [Hz] and the
# current-mode ramp [A per cycle] are kept as metadata and do not enter the model.
PARAM_KEYS = {
    "resistor": (("R",), ()),
    "lc_filter": (("L", "C"), ("r_L", "r_C")),
    "boost_ccm": (("L", "C"), ("r_L", "r_C", "f_sw", "ramp")),
    "buck_ccm": (("L", "C"), ("r_L", "r_C", "f_sw", "ramp")),
    "controller_type1": (("K_i",), ()),
    "controller_type2": (("K_i",), ("T_z", "T_p", "f_z", "f_p")),
    "controller_type3": (("K_i",), ("T_z1", "T_z2", "T_p1", "T_p2", "f_z1", "f_z2", "f_p1", "f_p2")),
}
CORNERS = {
    "controller_type1": (),
    "controller_type2": ("z", "p"),
    "controller_type3": ("z1", "z2", "p1", "p2"),
}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "convblocks netlist",
    "type": "object",
    "required": ["blocks", "loops", "cascade"],
    "additionalProperties": False,
    "properties": {
        "blocks": {
            "type": "object",
            "minProperties": 1,
            "additionalProperties": {"$ref": "#/$defs/block"},
        },
        "loops": {"type": "array", "items": {"$ref": "#/$defs/loop"}},
        "cascade": {
            "type": "array",
            "minItems": 1,
            "uniqueItems": True,
            "items": {"type": "string"},
        },
        "order": {"enum": list(ORDERS)},
    },
    "$defs": {
        "block": {
            "type": "object",
            "required": ["kind", "params"],
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": list(TWO_PORT_KINDS + CONTROLLER_KINDS)},
                "params": {"type": "object", "additionalProperties": {"type": "number"}},
                "operating_point": {
                    "type": "object",
                    "required": ["v_in", "v_out", "i_out"],
                    "additionalProperties": False,
                    "properties": {
                        "v_in": {"type": "number"},
                        "v_out": {"type": "number"},
                        "i_out": {"type": "number"},
                    },
                },
            },
        },
        "loop": {
            "type": "object",
            "required": ["converter", "controller", "target", "ctl"],
            "additionalProperties": False,
            "properties": {
                "converter": {"type": "string"},
                "controller": {"type": "string"},
                "target": {"type": "string", "pattern": "^(v_out|state:.+)$"},
                "ctl": {"type": "string"},
                "sense": {"enum": list(SENSES)},
            },
        },
    },
}


@dataclass(frozen=True)
class BlockSpec:
    kind: str
    params: dict
    operating_point: Optional[dict] = None


@dataclass(frozen=True)
class LoopSpec:
    converter: str
    controller: str
    target: str
    ctl: str
    sense: str = "terminal"


@dataclass(frozen=True)
class NetlistDoc:
    blocks: dict
    loops: tuple = ()
    cascade: tuple = ()
    order: str = "loops_first"

    def to_dict(self) -> dict:
        out = {"blocks": {}, "loops": [], "cascade": list(self.cascade), "order": self.order}
        for name, spec in self.blocks.items():
            entry = {"kind": spec.kind, "params": dict(spec.params)}
            if spec.operating_point is not None:
                entry["operating_point"] = dict(spec.operating_point)
            out["blocks"][name] = entry
        for lp in self.loops:
            out["loops"].append({"converter": lp.converter, "controller": lp.controller,
                                 "target": lp.target, "ctl": lp.ctl, "sense": lp.sense})
        return out


def _reject_duplicates(pairs):
    keys = [k for k, _ in pairs]
    dupes = sorted({k for k in keys if keys.count(k) > 1})
    if dupes:
        raise ParseError(f"duplicate keys {dupes}")
    return dict(pairs)


def _reject_constant(name):
    raise ParseError(f"non-standard JSON constant {name}")


def parse_netlist(text: str) -> NetlistDoc:
    """Parse and validate a netlist document."""
    try:
        raw = json.loads(text, object_pairs_hook=_reject_duplicates, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None

    validator = jsonschema.Draft202012Validator(SCHEMA)
    error = jsonschema.exceptions.best_match(validator.iter_errors(raw))
    if error is not None:
        where = "/".join(str(p) for p in error.absolute_path) or "<root>"
        raise SchemaViolation(f"{where}: {error.message}")

    blocks = {}
    for name, entry in raw["blocks"].items():
        kind = entry["kind"]
        params = dict(entry["params"])
        required, optional = PARAM_KEYS[kind]
        unknown = set(params) - set(required) - set(optional)
        if unknown:
            raise SchemaViolation(f"blocks/{name}: unknown params {sorted(unknown)} for {kind}")
        missing = set(required) - set(params)
        if missing:
            raise SchemaViolation(f"blocks/{name}: missing params {sorted(missing)}")
        for corner in CORNERS.get(kind, ()):
            given = [key for key in (f"T_{corner}", f"f_{corner}") if key in params]
            if len(given) != 1:
                raise SchemaViolation(
                    f"blocks/{name}: give exactly one of T_{corner} or f_{corner}")
        op = entry.get("operating_point")
        if kind in ("boost_ccm", "buck_ccm") and op is None:
            raise SchemaViolation(f"blocks/{name}: {kind} needs an operating_point")
        if kind not in ("boost_ccm", "buck_ccm") and op is not None:
            raise SchemaViolation(f"blocks/{name}: {kind} takes no operating_point")
        blocks[name] = BlockSpec(kind, params, dict(op) if op is not None else None)

    for name in raw["cascade"]:
        if name not in blocks:
            raise UnresolvedRef(f"cascade references unknown block {name!r}")
        if blocks[name].kind not in TWO_PORT_KINDS:
            raise SchemaViolation(f"cascade entry {name!r} is a controller, not a two-port block")

    loops = []
    for idx, entry in enumerate(raw["loops"]):
        lp = LoopSpec(**entry)
        for role, ref in (("converter", lp.converter), ("controller", lp.controller)):
            if ref not in blocks:
                raise UnresolvedRef(f"loops/{idx}: {role} references unknown block {ref!r}")
        if blocks[lp.controller].kind not in CONTROLLER_KINDS:
            raise SchemaViolation(f"loops/{idx}: {lp.controller!r} is not a controller")
        if lp.converter not in raw["cascade"]:
            raise SchemaViolation(f"loops/{idx}: converter {lp.converter!r} is not in the cascade")
        if raw.get("order") == "cascade_first" and lp.target == "v_out":
            after = raw["cascade"][raw["cascade"].index(lp.converter) + 1:]
            if any(blocks[name].kind != "resistor" for name in after):
                raise SchemaViolation(
                    f"loops/{idx}: with cascade_first, v_out is the cascade output, which equals "
                    f"the output of {lp.converter!r} only if resistors alone follow it")
        loops.append(lp)

    return NetlistDoc(blocks, tuple(loops), tuple(raw["cascade"]), raw.get("order", "loops_first"))


def serialize_netlist(doc: NetlistDoc) -> str:
    return json.dumps(doc.to_dict(), indent=2) + "\n"


def _lc(params):
    return bk.LcParams(params["L"], params["C"], params.get("r_L", bk.DEFAULT_ESR),
                       params.get("r_C", bk.DEFAULT_ESR))


def _corner(params, corner):
    if f"T_{corner}" in params:
        return params[f"T_{corner}"]
    return bk.time_constant_from_frequency(params[f"f_{corner}"])


def build_two_port(spec: BlockSpec) -> StateSpaceBlock:
    p = spec.params
    if spec.kind == "resistor":
        return bk.resistor(p["R"])
    if spec.kind == "lc_filter":
        return bk.lc_filter(_lc(p))
    topology = "boost" if spec.kind == "boost_ccm" else "buck"
    op = bk.solve_operating_point(topology, spec.operating_point["v_in"],
                                  spec.operating_point["v_out"], spec.operating_point["i_out"])
    ctor = bk.boost_ccm if topology == "boost" else bk.buck_ccm
    return ctor(_lc(p), op)


def build_controller(spec: BlockSpec, name: str):
    kind = spec.kind.replace("controller_", "")
    consts = {f"T_{c}": _corner(spec.params, c) for c in CORNERS[spec.kind]}
    return bk.controller(bk.ControllerParams(kind, spec.params["K_i"], **consts), name)


def _apply_loop(block: StateSpaceBlock, lp: LoopSpec, ctrl, prefix: str = "") -> StateSpaceBlock:
    def resolve(labels, label):
        candidates = [label, prefix + label]
        head, sep, tail = label.partition(":")
        if sep:
            # "ref:iL" closed inside a cascade reads "ref:S.iL"
            candidates += [f"{prefix}{head}:{tail}", f"{head}:{prefix}{tail}"]
        for cand in candidates:
            if cand in labels:
                return cand
        raise BadIndex(f"loop on {lp.converter!r}: no label {label!r}")

    ctl = resolve(block.control_labels, lp.ctl)
    ol = attach_controller_open_loop(block, ctrl, ctl)
    k = block.control_index(ctl)
    if lp.target == "v_out":
        target = OutputVoltage()
    else:
        target = StateTarget(resolve(ol.state_labels, lp.target[len("state:"):]))
    gain = feedback_gain(target, ol, k, terminal=(lp.sense == "terminal"))
    return close_loop(ol, gain)


def _cascade_prefixes(count: int):
    """Label prefix each cascade position receives from a left fold of series connections."""
    if count == 1:
        return [""]
    return ["S." * (count - 1)] + ["S." * (count - 1 - i) + "L." for i in range(1, count)]


def build_system(doc: NetlistDoc) -> StateSpaceBlock:
    """Construct all blocks, close the loops and connect the cascade."""
    controllers = {name: build_controller(spec, name) for name, spec in doc.blocks.items()
                   if spec.kind in CONTROLLER_KINDS}
    parts = {name: build_two_port(doc.blocks[name]) for name in doc.cascade}
    if doc.order == "loops_first":
        for lp in doc.loops:
            parts[lp.converter] = _apply_loop(parts[lp.converter], lp, controllers[lp.controller])
        return cascade_blocks(*(parts[name] for name in doc.cascade))
    system = cascade_blocks(*(parts[name] for name in doc.cascade))
    prefixes = dict(zip(doc.cascade, _cascade_prefixes(len(doc.cascade))))
    for lp in doc.loops:
        system = _apply_loop(system, lp, controllers[lp.controller], prefixes[lp.converter])
    return system
