"""Named transfer functions, Bode sweeps and step studies over any block."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BadGrid, BadIndex, SingularAtS, UnstableBlock, ZeroAdmittance
from .model import (
    StateSpaceBlock,
    TimeSeries,
    eval_response,
    eval_state_response,
    poles,
    simulate,
)

# query name -> (input column, output row); control inputs are offset by k
CHANNELS = {
    "control_to_output": (2, 1),
    "output_impedance": (1, 1),
    "input_admittance": (0, 0),
    "forward_voltage_gain": (0, 1),
    "reverse_current_gain": (1, 0),
}
QUERY_NAMES = tuple(CHANNELS) + ("input_impedance", "ref_to_state")


@dataclass(frozen=True)
class TransferQuery:
    """A named input/output channel.

    ``k`` selects the control input for ``control_to_output`` and
    ``ref_to_state``; ``state`` selects the state (index or label) for
    ``ref_to_state``.
    """

    name: str
    k: int = 0
    state: int | str = 0

    def __post_init__(self):
        if self.name not in QUERY_NAMES:
            raise BadIndex(f"unknown transfer query {self.name!r}; choose from {QUERY_NAMES}")

    def validate(self, block: StateSpaceBlock):
        if self.name in ("control_to_output", "ref_to_state"):
            block.control_index(self.k)
        if self.name == "ref_to_state":
            block.state_index(self.state)


def named_transfer(block: StateSpaceBlock, query: TransferQuery, s: complex) -> complex:
    query.validate(block)
    if query.name == "input_impedance":
        y = eval_response(block, 0, 0, s)
        if y == 0:
            raise ZeroAdmittance(f"input admittance is zero at s={s}")
        return 1.0 / y
    if query.name == "ref_to_state":
        return eval_state_response(block, 2 + query.k, query.state, s)
    i, o = CHANNELS[query.name]
    if query.name == "control_to_output":
        i += query.k
    return eval_response(block, i, o, s)


@dataclass(frozen=True)
class FrequencyGrid:
    f_start: float = 1.0
    f_stop: float = 1e6
    points_per_decade: int = 50

    def __post_init__(self):
        if not (0 < self.f_start < self.f_stop) or not math.isfinite(self.f_stop):
            raise BadGrid(f"need 0 < f_start < f_stop, got {self.f_start}, {self.f_stop}")
        if int(self.points_per_decade) != self.points_per_decade or self.points_per_decade < 1:
            raise BadGrid(f"points_per_decade must be a positive integer, got {self.points_per_decade}")

    def frequencies(self) -> np.ndarray:
        decades = math.log10(self.f_stop / self.f_start)
        count = int(round(decades * self.points_per_decade)) + 1
        return np.logspace(math.log10(self.f_start), math.log10(self.f_stop), max(count, 2))


@dataclass(frozen=True, eq=False)
class BodeTable:
    f: np.ndarray
    magnitude_db: np.ndarray
    phase_deg: np.ndarray
    singular: np.ndarray

    def rows(self):
        return zip(self.f, self.magnitude_db, self.phase_deg, self.singular)


def unwrap_phase(phase_deg: np.ndarray) -> np.ndarray:
    """Remove adjacent jumps above 180 degrees, skipping NaN entries.

    The first valid entry stays on the branch (-180, 180].
    """
    out = np.array(phase_deg, dtype=float)
    prev = None
    for idx, value in enumerate(out):
        if np.isnan(value):
            continue
        if prev is None:
            value = value if value > -180.0 else value + 360.0
        else:
            value -= 360.0 * np.round((value - prev) / 360.0)
        out[idx] = value
        prev = value
    return out


def bode_sweep(block: StateSpaceBlock, query: TransferQuery, grid: FrequencyGrid) -> BodeTable:
    """Magnitude in dB and unwrapped phase in degrees over a log grid.

    Points where the response is singular are flagged and left as NaN.
    """
    query.validate(block)
    f = grid.frequencies()
    values = np.full(f.shape, np.nan, dtype=complex)
    singular = np.zeros(f.shape, dtype=bool)
    for idx, fk in enumerate(f):
        try:
            values[idx] = named_transfer(block, query, 2j * math.pi * fk)
        except (SingularAtS, ZeroAdmittance):
            singular[idx] = True
    with np.errstate(divide="ignore"):
        mag = 20.0 * np.log10(np.abs(values))
    phase = np.degrees(np.angle(values))
    mag[singular] = np.nan
    phase[singular] = np.nan
    return BodeTable(f, mag, unwrap_phase(phase), singular)


def step_study(block: StateSpaceBlock, channel, amplitude: float, duration: float,
               dt: float) -> TimeSeries:
    """Small-signal response to a step on one input, starting from zero state."""
    if not (dt > 0 and duration > 0 and math.isfinite(dt) and math.isfinite(duration)):
        raise BadGrid(f"need dt > 0 and duration > 0, got dt={dt}, duration={duration}")
    p = poles(block)
    if p.size and np.max(p.real) >= 0:
        raise UnstableBlock(f"block is not asymptotically stable (max Re = {np.max(p.real):.6g})")
    i = block.input_index(channel)
    inputs = TimeSeries(np.array([0.0]), {block.input_labels[i]: np.array([float(amplitude)])})
    return simulate(block, inputs, dt=dt, duration=duration)


def slowest_time_constant(block: StateSpaceBlock) -> float:
    """``1/min|Re(p)|`` over the poles (infinite for a pole on the imaginary axis)."""
    p = poles(block)
    if p.size == 0:
        return 0.0
    slowest = float(np.min(np.abs(p.real)))
    return math.inf if slowest == 0.0 else 1.0 / slowest
