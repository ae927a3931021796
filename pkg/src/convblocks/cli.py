"""Command-line front end: ``convblocks <command> <netlist.json> [options]``.

Exit codes: 0 success, 1 parse/validation of the netlist, 2 building or
composing the model, 3 analysis.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from .analysis import FrequencyGrid, TransferQuery, bode_sweep, named_transfer, step_study
from .errors import BadGrid, BadIndex, ConvBlocksError
from .model import StateSpaceBlock, poles
from .netlist import NetlistDoc, build_system, parse_netlist

EXIT_OK, EXIT_PARSE, EXIT_COMPOSE, EXIT_ANALYSIS = 0, 1, 2, 3
COMMANDS = ("build", "tf", "bode", "step", "poles")


class CommandFailed(Exception):
    """A command stopped with a nonzero exit status; ``cause`` holds the module error."""

    def __init__(self, exit_code: int, cause: BaseException):
        super().__init__(f"{type(cause).__name__}: {cause}")
        self.exit_code = exit_code
        self.cause = cause


@dataclass
class ResultTable:
    columns: list
    rows: list
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        width = len(self.columns)
        for idx, row in enumerate(self.rows):
            if len(row) != width:
                raise ValueError(f"row {idx} has {len(row)} cells, expected {width}")

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write(",".join(self.columns) + "\n")
        for row in self.rows:
            out.write(",".join(_csv_cell(v) for v in row) + "\n")
        return out.getvalue()

    def to_json(self) -> str:
        payload = {
            "meta": self.meta,
            "columns": list(self.columns),
            "rows": [[_json_cell(v) for v in row] for row in self.rows],
        }
        return json.dumps(payload, indent=2) + "\n"


def _csv_cell(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return "%.17g" % float(value)


def _json_cell(value):
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    value = float(value)
    return value if math.isfinite(value) else None


def _build_table(block: StateSpaceBlock) -> ResultTable:
    rows = []
    for name in ("A", "B", "C", "D"):
        mat = getattr(block, name)
        for (i, j), value in np.ndenumerate(mat):
            rows.append([name, i, j, value])
    meta = {
        "n": block.n,
        "q": block.q,
        "state_labels": list(block.state_labels),
        "control_labels": list(block.control_labels),
        "input_labels": list(block.input_labels),
        "output_labels": ["i_in", "v_out"],
    }
    return ResultTable(["matrix", "row", "col", "value"], rows, meta)


def _tf_table(block, options) -> ResultTable:
    query = TransferQuery(options["query"], options.get("k", 0), options.get("state", 0))
    rows = []
    for f in options["freq"]:
        if not math.isfinite(f) or f < 0:
            raise BadGrid(f"frequencies must be finite and >= 0, got {f}")
        h = complex(named_transfer(block, query, 2j * math.pi * f))
        mag = 20.0 * math.log10(abs(h)) if h != 0 else -math.inf
        rows.append([f, h.real, h.imag, mag, math.degrees(math.atan2(h.imag, h.real))])
    meta = {"query": query.name, "k": query.k, "state": query.state}
    return ResultTable(["f_hz", "re", "im", "mag_db", "phase_deg"], rows, meta)


def _bode_table(block, options) -> ResultTable:
    query = TransferQuery(options["query"], options.get("k", 0), options.get("state", 0))
    grid = FrequencyGrid(options.get("fstart", 1.0), options.get("fstop", 1e6),
                         options.get("ppd", 50))
    table = bode_sweep(block, query, grid)
    rows = [[f, m, p, bool(s)] for f, m, p, s in table.rows()]
    meta = {"query": query.name, "k": query.k, "state": query.state}
    return ResultTable(["f_hz", "mag_db", "phase_deg", "singular"], rows, meta)


def _step_table(block, options) -> ResultTable:
    series = step_study(block, options["input"], options["amp"], options["dur"], options["dt"])
    names = list(series.channels)
    offsets = dict(options.get("offset") or {})
    for ch in offsets:
        if ch not in series.channels:
            raise BadIndex(f"offset channel {ch!r} is not an output of the step study")
    columns = ["t"] + names + [f"{ch}_abs" for ch in offsets]
    rows = []
    for idx, t in enumerate(series.t):
        row = [t] + [series.channels[ch][idx] for ch in names]
        row += [series.channels[ch][idx] + off for ch, off in offsets.items()]
        rows.append(row)
    meta = {"input": options["input"], "amplitude": options["amp"],
            "small_signal": True, "offsets": offsets}
    return ResultTable(columns, rows, meta)


def _poles_table(block) -> ResultTable:
    p = poles(block)
    rows = [[i, z.real, z.imag, bool(z.real < 0)] for i, z in enumerate(p)]
    stable = bool(np.all(p.real < 0))
    return ResultTable(["index", "re", "im", "left_half_plane"], rows,
                       {"n": block.n, "stable": stable})


def run_command(doc: NetlistDoc, command: str, options: dict | None = None) -> ResultTable:
    """Build the system in ``doc`` and run ``command`` on it.

    Raises :class:`CommandFailed` carrying exit code 2 when the model cannot
    be built and 3 when the analysis fails.
    """
    options = dict(options or {})
    if command not in COMMANDS:
        raise CommandFailed(EXIT_ANALYSIS, ValueError(f"unknown command {command!r}"))
    try:
        block = build_system(doc)
    except (ConvBlocksError, ValueError) as exc:
        raise CommandFailed(EXIT_COMPOSE, exc) from exc
    try:
        if command == "build":
            return _build_table(block)
        if command == "tf":
            return _tf_table(block, options)
        if command == "bode":
            return _bode_table(block, options)
        if command == "step":
            return _step_table(block, options)
        return _poles_table(block)
    except (ConvBlocksError, ValueError, KeyError) as exc:
        raise CommandFailed(EXIT_ANALYSIS, exc) from exc


def _freq_list(text: str):
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad frequency list {text!r}") from None


def _offset(text: str):
    name, sep, value = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected CHANNEL=VALUE, got {text!r}")
    return name.strip(), float(value)


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="convblocks",
                                     description="Compose and analyse converter state-space models.")
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("doc", help="netlist JSON file")
        p.add_argument("--out", default="-", help="output path (default stdout)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        return p

    command("build", "composed model summary and matrices")
    p = command("tf", "named transfer function at given frequencies")
    p.add_argument("--query", required=True)
    p.add_argument("--k", type=int, default=0, help="control input index")
    p.add_argument("--state", default="0", help="state index or label for ref_to_state")
    p.add_argument("--freq", type=_freq_list, required=True, help="comma separated list in Hz")
    p = command("bode", "magnitude and phase sweep")
    p.add_argument("--query", required=True)
    p.add_argument("--k", type=int, default=0)
    p.add_argument("--state", default="0")
    p.add_argument("--fstart", type=float, default=1.0)
    p.add_argument("--fstop", type=float, default=1e6)
    p.add_argument("--ppd", type=int, default=50)
    p = command("step", "small-signal step response from zero state")
    p.add_argument("--input", required=True, help="input label, e.g. i_out or ref:v_out")
    p.add_argument("--amp", type=float, required=True)
    p.add_argument("--dur", type=float, required=True)
    p.add_argument("--dt", type=float, required=True)
    p.add_argument("--offset", type=_offset, action="append", default=[],
                   help="CHANNEL=VALUE operating-point offset added as an extra <channel>_abs column")
    command("poles", "eigenvalues and stability verdict")
    return parser


def _state_arg(text: str):
    return int(text) if text.lstrip("-").isdigit() else text


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        with open(args.doc, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        print(f"error: cannot read {args.doc}: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        doc = parse_netlist(text)
    except ConvBlocksError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_PARSE

    options = {}
    if args.command in ("tf", "bode"):
        options.update(query=args.query, k=args.k, state=_state_arg(args.state))
    if args.command == "tf":
        options["freq"] = args.freq
    elif args.command == "bode":
        options.update(fstart=args.fstart, fstop=args.fstop, ppd=args.ppd)
    elif args.command == "step":
        options.update(input=args.input, amp=args.amp, dur=args.dur, dt=args.dt,
                       offset=dict(args.offset))
    try:
        table = run_command(doc, args.command, options)
    except CommandFailed as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code

    text = table.to_csv() if args.format == "csv" else table.to_json()
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    if args.command == "poles":
        print("stable" if table.meta["stable"] else "unstable", file=sys.stderr)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
