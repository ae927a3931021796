"""Constructors for passive components, converters and controllers.

All quantities are SI (V, A, s, H, F, Ohm).  Converter models are unterminated
small-signal models around an operating point; the load is attached later
with :func:`convblocks.compose.series_connect`.
"""

from __future__ import annotations

import math
import numbers
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import (
    InfeasiblePoint,
    InvalidOperatingPoint,
    InvalidParams,
    NonPositiveFrequency,
    NonPositiveR,
)
from .model import ControllerBlock, StateSpaceBlock, make_block

DEFAULT_ESR = 10e-3


def _finite(*values):
    return all(isinstance(v, numbers.Real) and not isinstance(v, bool) and math.isfinite(v)
               for v in values)


@dataclass(frozen=True)
class LcParams:
    L: float
    C: float
    r_L: float = DEFAULT_ESR
    r_C: float = DEFAULT_ESR

    def __post_init__(self):
        if not _finite(self.L, self.C, self.r_L, self.r_C):
            raise InvalidParams(f"non-finite LC parameters: {self}")
        if self.L <= 0 or self.C <= 0:
            raise InvalidParams(f"L and C must be positive: L={self.L}, C={self.C}")
        if self.r_L < 0 or self.r_C < 0:
            raise InvalidParams(f"ESR values must be nonnegative: r_L={self.r_L}, r_C={self.r_C}")


@dataclass(frozen=True)
class OperatingPoint:
    V_in: float
    V_out: float
    I_out: float
    D: float
    I_L: float

    def __post_init__(self):
        if not _finite(self.V_in, self.V_out, self.I_out, self.D, self.I_L):
            raise InvalidOperatingPoint(f"non-finite operating point: {self}")
        if self.V_in <= 0 or self.V_out <= 0:
            raise InvalidOperatingPoint("V_in and V_out must be positive")
        if not 0 < self.D < 1:
            raise InvalidOperatingPoint(f"duty ratio {self.D} outside (0, 1)")


CONTROLLER_FIELDS = {
    "type1": (),
    "type2": ("T_z", "T_p"),
    "type3": ("T_z1", "T_z2", "T_p1", "T_p2"),
}
_ALL_TIME_CONSTANTS = ("T_z", "T_p", "T_z1", "T_z2", "T_p1", "T_p2")


@dataclass(frozen=True)
class ControllerParams:
    kind: str
    K_i: float
    T_z: Optional[float] = None
    T_p: Optional[float] = None
    T_z1: Optional[float] = None
    T_z2: Optional[float] = None
    T_p1: Optional[float] = None
    T_p2: Optional[float] = None

    def __post_init__(self):
        kind = str(self.kind).lower().replace("_", "").replace(" ", "")
        if kind not in CONTROLLER_FIELDS:
            raise InvalidParams(f"unknown controller kind {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        if not _finite(self.K_i) or self.K_i <= 0:
            raise InvalidParams(f"K_i must be positive, got {self.K_i}")
        needed = CONTROLLER_FIELDS[kind]
        for name in _ALL_TIME_CONSTANTS:
            value = getattr(self, name)
            if name in needed:
                if value is None or not _finite(value) or value <= 0:
                    raise InvalidParams(f"{kind} controller needs {name} > 0, got {value}")
            elif value is not None:
                raise InvalidParams(f"{name} is not used by a {kind} controller")


def time_constant_from_frequency(f: float) -> float:
    """Time constant ``1/(2 pi f)`` of a corner at ``f`` Hz."""
    if not _finite(f) or f <= 0:
        raise NonPositiveFrequency(f"frequency must be positive, got {f}")
    return 1.0 / (2.0 * math.pi * f)


def resistor(R: float) -> StateSpaceBlock:
    """Resistive load: no states, ``i_in = v_in/R - i_out`` and ``v_out = v_in``."""
    if not _finite(R) or R <= 0:
        raise NonPositiveR(f"resistance must be positive, got {R}")
    return make_block(np.zeros((0, 0)), np.zeros((0, 2)), np.zeros((2, 0)),
                      [[1.0 / R, -1.0], [1.0, 0.0]])


def lc_filter(p: LcParams) -> StateSpaceBlock:
    L, C, rL, rC = p.L, p.C, p.r_L, p.r_C
    A = [[-(rL + rC) / L, -1.0 / L],
         [1.0 / C, 0.0]]
    B = [[1.0 / L, -rC / L],
         [0.0, 1.0 / C]]
    Cm = [[1.0, 0.0],
          [rC, 1.0]]
    D = [[0.0, 0.0],
         [0.0, rC]]
    return make_block(A, B, Cm, D, (), ("iL", "vC"))


def boost_ccm(p: LcParams, op: OperatingPoint) -> StateSpaceBlock:
    """Unterminated CCM boost converter linearized at ``op`` (duty input ``"duty"``)."""
    if op.V_out <= op.V_in:
        raise InvalidOperatingPoint(f"boost needs V_out > V_in, got {op.V_out} <= {op.V_in}")
    L, C, rL, rC = p.L, p.C, p.r_L, p.r_C
    d = 1.0 - op.D
    A = [[-(d * rC + rL) / L, -d / L],
         [d / C, 0.0]]
    B = [[1.0 / L, -d * rC / L, op.V_out / L],
         [0.0, 1.0 / C, -op.I_L / C]]
    Cm = [[1.0, 0.0],
          [d * rC, 1.0]]
    D = [[0.0, 0.0, 0.0],
         [0.0, rC, -rC * op.I_L]]
    return make_block(A, B, Cm, D, ("duty",), ("iL", "vC"))


def buck_ccm(p: LcParams, op: OperatingPoint) -> StateSpaceBlock:
    """Unterminated CCM buck converter linearized at ``op`` (duty input ``"duty"``).

    Averaged large-signal equations, with the output current counted into
    the output port::

        L diL/dt = d v_in - r_L iL - v_out
        C dvC/dt = iL + i_out
        v_out    = vC + r_C (iL + i_out)
        i_in     = d iL
    """
    if op.V_out >= op.V_in:
        raise InvalidOperatingPoint(f"buck needs V_out < V_in, got {op.V_out} >= {op.V_in}")
    L, C, rL, rC = p.L, p.C, p.r_L, p.r_C
    A = [[-(rL + rC) / L, -1.0 / L],
         [1.0 / C, 0.0]]
    B = [[op.D / L, -rC / L, op.V_in / L],
         [0.0, 1.0 / C, 0.0]]
    Cm = [[op.D, 0.0],
          [rC, 1.0]]
    D = [[0.0, 0.0, op.I_L],
         [0.0, rC, 0.0]]
    return make_block(A, B, Cm, D, ("duty",), ("iL", "vC"))


def solve_operating_point(topology: str, V_in: float, V_out: float, I_out: float) -> OperatingPoint:
    """Lossless steady state of a buck or boost converter.

    ``I_out`` is the load current drawn from the output (positive when the
    converter delivers power).
    """
    if not _finite(V_in, V_out, I_out):
        raise InfeasiblePoint("operating point values must be finite")
    if V_in <= 0 or V_out <= 0:
        raise InfeasiblePoint("V_in and V_out must be positive")
    topology = topology.lower()
    if topology == "boost":
        if V_out <= V_in:
            raise InfeasiblePoint(f"boost cannot reach V_out={V_out} from V_in={V_in}")
        D = 1.0 - V_in / V_out
        I_L = I_out / (1.0 - D)
    elif topology == "buck":
        if V_out >= V_in:
            raise InfeasiblePoint(f"buck cannot reach V_out={V_out} from V_in={V_in}")
        D = V_out / V_in
        I_L = I_out
    else:
        raise InfeasiblePoint(f"unknown topology {topology!r}")
    return OperatingPoint(V_in=V_in, V_out=V_out, I_out=I_out, D=D, I_L=I_L)


def controller(p: ControllerParams, name: str = "ctrl") -> ControllerBlock:
    """Integral controller with zero, one or two lead-lag sections.

    Type 1: ``K_i/s``; Type 2: ``K_i/s (1+T_z s)/(1+T_p s)``;
    Type 3: ``K_i/s (1+T_z1 s)(1+T_z2 s)/((1+T_p1 s)(1+T_p2 s))``.
    None of them has direct feedthrough.
    """
    Ki = p.K_i
    if p.kind == "type1":
        A, B, C = [[0.0]], [[Ki]], [[1.0]]
    elif p.kind == "type2":
        Tz, Tp = p.T_z, p.T_p
        A = [[0.0, 0.0],
             [1.0, -1.0 / Tp]]
        B = [[Ki / Tp],
             [Ki * Tz / Tp]]
        C = [[0.0, 1.0]]
    else:
        Tz1, Tz2, Tp1, Tp2 = p.T_z1, p.T_z2, p.T_p1, p.T_p2
        P = Tp1 * Tp2
        # observer canonical form of the denominator s^3 + (Tp1+Tp2)/P s^2 + s/P
        A = [[0.0, 0.0, 0.0],
             [1.0, 0.0, -1.0 / P],
             [0.0, 1.0, -(Tp1 + Tp2) / P]]
        B = [[Ki / P],
             [Ki * (Tz1 + Tz2) / P],
             [Ki * Tz1 * Tz2 / P]]
        C = [[0.0, 0.0, 1.0]]
    return ControllerBlock(A, B, C, 0.0, name=name)


def gain_controller(gain: float, name: str = "gain") -> ControllerBlock:
    """Static controller ``u = gain * e`` (no states)."""
    return ControllerBlock(np.zeros((0, 0)), np.zeros((0, 1)), np.zeros((1, 0)), gain, name=name)
