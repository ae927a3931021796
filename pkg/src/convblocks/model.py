"""Uniform two-port state-space block and the operations on a single block.

Every block (filter, load, converter, composed system) is described by

    dx/dt = A x + B [v_in, i_out, ctl...]^T
    [i_in, v_out]^T = C x + D [v_in, i_out, ctl...]^T

with currents defined as flowing into both ports.  Passive blocks simply
have no control inputs (q == 0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
import scipy.linalg

from .errors import (
    BadGrid,
    BadIndex,
    DimensionMismatch,
    DuplicateLabel,
    NonFinite,
    SingularAtS,
)

INPUT_NAMES = ("v_in", "i_out")
OUTPUT_NAMES = ("i_in", "v_out")

# condition number above which sI - A is treated as singular
SINGULAR_COND = 1e14


def _as_matrix(name, value):
    arr = np.array(value, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2:
        raise DimensionMismatch(f"{name} must be two-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NonFinite(f"{name} contains NaN or Inf entries")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class StateSpaceBlock:
    """Immutable two-port block with ``n`` states and ``q`` control inputs.

    Input columns are ordered ``(v_in, i_out, ctl_0, ..., ctl_{q-1})`` and
    output rows ``(i_in, v_out)``.  The partition accessors (``B1``, ``C2``,
    ``D23`` ...) are views into the same arrays.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    control_labels: tuple[str, ...] = ()
    state_labels: tuple[str, ...] = ()

    def __post_init__(self):
        A = _as_matrix("A", self.A)
        B = _as_matrix("B", self.B)
        C = _as_matrix("C", self.C)
        D = _as_matrix("D", self.D)
        n = A.shape[0]
        if A.shape != (n, n):
            raise DimensionMismatch(f"A must be square, got {A.shape}")
        if B.shape[0] != n or B.shape[1] < 2:
            raise DimensionMismatch(f"B must be {n}x(2+q), got {B.shape}")
        q = B.shape[1] - 2
        if C.shape != (2, n):
            raise DimensionMismatch(f"C must be 2x{n}, got {C.shape}")
        if D.shape != (2, 2 + q):
            raise DimensionMismatch(f"D must be 2x{2 + q}, got {D.shape}")
        ctl = tuple(str(s) for s in self.control_labels)
        states = tuple(str(s) for s in self.state_labels)
        if len(ctl) != q:
            raise DimensionMismatch(f"{q} control inputs but {len(ctl)} control labels")
        if len(states) != n:
            raise DimensionMismatch(f"{n} states but {len(states)} state labels")
        if len(set(ctl)) != q or set(ctl) & set(INPUT_NAMES):
            raise DuplicateLabel(f"control labels must be unique: {ctl}")
        if len(set(states)) != n or set(states) & set(OUTPUT_NAMES):
            raise DuplicateLabel(f"state labels must be unique: {states}")
        for name, value in (("A", A), ("B", B), ("C", C), ("D", D),
                            ("control_labels", ctl), ("state_labels", states)):
            object.__setattr__(self, name, value)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def q(self) -> int:
        return self.B.shape[1] - 2

    @property
    def input_labels(self) -> tuple[str, ...]:
        return INPUT_NAMES + self.control_labels

    @property
    def is_passive(self) -> bool:
        return self.q == 0

    # partitions
    @property
    def B1(self):
        return self.B[:, 0]

    @property
    def B2(self):
        return self.B[:, 1]

    @property
    def B3(self):
        return self.B[:, 2:]

    @property
    def C1(self):
        return self.C[0]

    @property
    def C2(self):
        return self.C[1]

    @property
    def D11(self) -> float:
        return float(self.D[0, 0])

    @property
    def D12(self) -> float:
        return float(self.D[0, 1])

    @property
    def D21(self) -> float:
        return float(self.D[1, 0])

    @property
    def D22(self) -> float:
        return float(self.D[1, 1])

    @property
    def D13(self):
        return self.D[0, 2:]

    @property
    def D23(self):
        return self.D[1, 2:]

    def input_index(self, key) -> int:
        """Column index of an input given by position or label."""
        if isinstance(key, str):
            try:
                return self.input_labels.index(key)
            except ValueError:
                raise BadIndex(f"unknown input {key!r}; have {self.input_labels}") from None
        idx = int(key)
        if not 0 <= idx < 2 + self.q:
            raise BadIndex(f"input index {idx} out of range for {2 + self.q} inputs")
        return idx

    def control_index(self, key) -> int:
        """Position ``k`` (0-based among the control inputs) of a control input."""
        if isinstance(key, str):
            try:
                return self.control_labels.index(key)
            except ValueError:
                raise BadIndex(f"unknown control input {key!r}; have {self.control_labels}") from None
        k = int(key)
        if not 0 <= k < self.q:
            raise BadIndex(f"control index {k} out of range for q={self.q}")
        return k

    def state_index(self, key) -> int:
        if isinstance(key, str):
            try:
                return self.state_labels.index(key)
            except ValueError:
                raise BadIndex(f"unknown state {key!r}") from None
        i = int(key)
        if not 0 <= i < self.n:
            raise BadIndex(f"state index {i} out of range for n={self.n}")
        return i

    def output_index(self, key) -> int:
        if isinstance(key, str):
            if key not in OUTPUT_NAMES:
                raise BadIndex(f"unknown output {key!r}")
            return OUTPUT_NAMES.index(key)
        o = int(key)
        if o not in (0, 1):
            raise BadIndex(f"output index {o} out of range")
        return o

    def replace(self, **changes) -> "StateSpaceBlock":
        fields = dict(A=self.A, B=self.B, C=self.C, D=self.D,
                      control_labels=self.control_labels, state_labels=self.state_labels)
        fields.update(changes)
        return StateSpaceBlock(**fields)

    def __eq__(self, other):
        if not isinstance(other, StateSpaceBlock):
            return NotImplemented
        return (self.control_labels == other.control_labels
                and self.state_labels == other.state_labels
                and all(np.array_equal(getattr(self, m), getattr(other, m)) for m in "ABCD"))

    __hash__ = None

    def __repr__(self):
        return (f"StateSpaceBlock(n={self.n}, q={self.q}, "
                f"states={list(self.state_labels)}, controls={list(self.control_labels)})")


@dataclass(frozen=True, eq=False)
class ControllerBlock:
    """SISO controller: error ``e`` in, control signal ``u`` out."""

    A_C: np.ndarray
    B_C: np.ndarray
    C_C: np.ndarray
    D_C: float = 0.0
    name: str = "ctrl"

    def __post_init__(self):
        A = _as_matrix("A_C", self.A_C)
        m = A.shape[0]
        if A.shape != (m, m):
            raise DimensionMismatch(f"A_C must be square, got {A.shape}")
        B = _as_matrix("B_C", np.reshape(self.B_C, (m, 1)) if np.size(self.B_C) == m else self.B_C)
        C = _as_matrix("C_C", np.reshape(self.C_C, (1, m)) if np.size(self.C_C) == m else self.C_C)
        if B.shape != (m, 1) or C.shape != (1, m):
            raise DimensionMismatch(f"controller with m={m} needs B_C {m}x1 and C_C 1x{m}")
        D_C = float(self.D_C)
        if not math.isfinite(D_C):
            raise NonFinite("D_C is not finite")
        object.__setattr__(self, "A_C", A)
        object.__setattr__(self, "B_C", B)
        object.__setattr__(self, "C_C", C)
        object.__setattr__(self, "D_C", D_C)

    @property
    def m(self) -> int:
        return self.A_C.shape[0]

    def response(self, s: complex) -> complex:
        """Frequency response ``C_C (sI - A_C)^-1 B_C + D_C``."""
        return _channel_response(self.A_C, self.B_C[:, 0], self.C_C[0], self.D_C, s)

    def __repr__(self):
        return f"ControllerBlock(name={self.name!r}, m={self.m}, D_C={self.D_C})"


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Uniformly sampled named channels."""

    t: np.ndarray
    channels: Mapping[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        if t.ndim != 1 or t.size == 0:
            raise BadGrid("time vector must be one-dimensional and non-empty")
        if t.size > 1:
            steps = np.diff(t)
            if np.any(steps <= 0) or not np.allclose(steps, steps[0], rtol=1e-6, atol=0.0):
                raise BadGrid("time samples must be uniformly spaced and increasing")
        chans = {}
        for name, values in self.channels.items():
            v = np.asarray(values, dtype=float)
            if v.shape != t.shape:
                raise BadGrid(f"channel {name!r} has {v.shape} samples, time has {t.shape}")
            chans[str(name)] = v
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "channels", chans)

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0]) if self.t.size > 1 else 0.0

    def __getitem__(self, name) -> np.ndarray:
        return self.channels[name]

    def __len__(self):
        return self.t.size


def make_block(A, B, C, D, control_labels: Sequence[str] = (),
               state_labels: Sequence[str] = ()) -> StateSpaceBlock:
    """Validate matrices and labels and return a block.

    ``n`` is taken from ``A`` and ``q`` from the column count of ``B``.
    """
    return StateSpaceBlock(A, B, C, D, tuple(control_labels), tuple(state_labels))


def _channel_response(A, b, c, d, s):
    n = A.shape[0]
    if n == 0:
        return complex(d)
    M = s * np.eye(n) - A
    cond = np.linalg.cond(M)
    if not np.isfinite(cond) or cond > SINGULAR_COND:
        raise SingularAtS(f"sI - A is singular at s={s} (cond={cond:.3g})")
    x = np.linalg.solve(M, b.astype(complex))
    return complex(c @ x + d)


def eval_response(block: StateSpaceBlock, input_index, output_index, s: complex) -> complex:
    """Scalar response ``C[o] (sI - A)^-1 B[:, i] + D[o, i]`` at complex frequency ``s``."""
    i = block.input_index(input_index)
    o = block.output_index(output_index)
    return _channel_response(block.A, block.B[:, i], block.C[o], block.D[o, i], complex(s))


def eval_state_response(block: StateSpaceBlock, input_index, state, s: complex) -> complex:
    """Response from an input to a single state variable."""
    i = block.input_index(input_index)
    j = block.state_index(state)
    return _channel_response(block.A, block.B[:, i], np.eye(block.n)[j], 0.0, complex(s))


def response_matrix(block: StateSpaceBlock, s: complex) -> np.ndarray:
    """All 2 x (2+q) channel responses at ``s``."""
    out = np.empty((2, 2 + block.q), dtype=complex)
    for o in range(2):
        for i in range(2 + block.q):
            out[o, i] = eval_response(block, i, o, s)
    return out


def poles(block: StateSpaceBlock) -> np.ndarray:
    """Eigenvalues of ``A`` sorted by real then imaginary part."""
    if block.n == 0:
        return np.empty(0, dtype=complex)
    ev = np.linalg.eigvals(block.A).astype(complex)
    return ev[np.lexsort((ev.imag, ev.real))]


def is_stable(block: StateSpaceBlock) -> bool:
    return bool(np.all(poles(block).real < 0))


def discretize(A, B, dt: float):
    """Zero-order-hold pair ``(Phi, Gamma)`` from the exponential of ``[[A, B], [0, 0]] dt``."""
    n, p = B.shape
    aug = np.zeros((n + p, n + p))
    aug[:n, :n] = A
    aug[:n, n:] = B
    E = scipy.linalg.expm(aug * dt)
    return E[:n, :n], E[:n, n:]


def simulate(block: StateSpaceBlock, inputs: TimeSeries, x0=None, *,
             dt: float, duration: float) -> TimeSeries:
    """Propagate the block exactly under zero-order hold.

    ``inputs`` holds piecewise-constant channels named after the block's input
    labels; channels that are not given are zero.  The returned series is
    sampled at ``k*dt`` for ``k = 0..N`` and contains ``i_in``, ``v_out`` and
    every state.
    """
    if not (dt > 0 and math.isfinite(dt)):
        raise BadGrid(f"dt must be positive, got {dt}")
    if not (duration > 0 and math.isfinite(duration)):
        raise BadGrid(f"duration must be positive, got {duration}")
    if inputs.t[0] > 0:
        raise BadGrid("input series starts after t=0")
    unknown = set(inputs.channels) - set(block.input_labels)
    if unknown:
        raise BadIndex(f"input series has unknown channels {sorted(unknown)}")

    steps = int(math.ceil(duration / dt - 1e-9))
    t = np.arange(steps + 1) * dt
    U = np.zeros((steps + 1, 2 + block.q))
    idx = np.searchsorted(inputs.t, t, side="right") - 1
    for name, values in inputs.channels.items():
        U[:, block.input_index(name)] = values[idx]

    n = block.n
    X = np.zeros((steps + 1, n))
    if x0 is not None:
        x0 = np.asarray(x0, dtype=float).reshape(-1)
        if x0.size != n:
            raise DimensionMismatch(f"x0 has {x0.size} entries, block has {n} states")
        X[0] = x0
    if n:
        Phi, Gamma = discretize(block.A, block.B, dt)
        drive = U @ Gamma.T
        for k in range(steps):
            X[k + 1] = Phi @ X[k] + drive[k]

    Y = X @ block.C.T + U @ block.D.T
    channels = {"i_in": Y[:, 0], "v_out": Y[:, 1]}
    for j, label in enumerate(block.state_labels):
        channels[label] = X[:, j]
    return TimeSeries(t, channels)
