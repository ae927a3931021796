"""Connecting blocks: controller attachment, loop closing, series connection.

Controller attachment turns a converter control input into the control
error of an attached controller (open loop).  Closing the loop feeds a
selected variable back onto that error input, so the input becomes the
reference.  Series connection joins the output port of a source block to the
input port of a load block and eliminates the inner terminal variables.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .errors import (
    BadIndex,
    DimensionMismatch,
    FeedthroughNotNegligible,
    IllPosedConnection,
    NoControlInput,
)
from .model import ControllerBlock, StateSpaceBlock, make_block

WELL_POSED_TOL = 1e-12
FEEDTHROUGH_TOL = 1e-9


def _blkdiag(*mats):
    mats = [np.asarray(m, dtype=float) for m in mats]
    rows = sum(m.shape[0] for m in mats)
    cols = sum(m.shape[1] for m in mats)
    out = np.zeros((rows, cols))
    r = c = 0
    for m in mats:
        out[r:r + m.shape[0], c:c + m.shape[1]] = m
        r += m.shape[0]
        c += m.shape[1]
    return out


def attach_controller_open_loop(conv: StateSpaceBlock, ctrl: ControllerBlock,
                                ctl=0) -> StateSpaceBlock:
    """Drive control input ``ctl`` of ``conv`` from the output of ``ctrl``.

    Controller states are appended after the converter states and the
    rerouted input becomes the controller's error input (label ``err:<old>``).
    The converter's direct feedthrough from the rerouted input is carried
    into the output matrix through ``D[:, ctl] C_C``; it vanishes for
    converters without such feedthrough.
    """
    if conv.q == 0:
        raise NoControlInput("block has no control input to attach a controller to")
    k = conv.control_index(ctl)
    j = 2 + k
    n, m = conv.n, ctrl.m
    b_ctl = conv.B[:, j]
    d_ctl = conv.D[:, j]

    A = np.zeros((n + m, n + m))
    A[:n, :n] = conv.A
    A[:n, n:] = np.outer(b_ctl, ctrl.C_C[0])
    A[n:, n:] = ctrl.A_C

    B = np.zeros((n + m, 2 + conv.q))
    B[:n] = conv.B
    B[:n, j] = b_ctl * ctrl.D_C
    B[n:, j] = ctrl.B_C[:, 0]

    C = np.hstack([conv.C, np.outer(d_ctl, ctrl.C_C[0])])

    D = np.array(conv.D)
    D[:, j] = d_ctl * ctrl.D_C

    labels = list(conv.control_labels)
    labels[k] = f"err:{labels[k]}"
    states = conv.state_labels + tuple(f"{ctrl.name}.x{i}" for i in range(m))
    return make_block(A, B, C, D, labels, states)


@dataclass(frozen=True)
class StateTarget:
    """Feed back a single state (e.g. an inductor current)."""

    index: Union[int, str]


@dataclass(frozen=True)
class OutputVoltage:
    """Feed back the output voltage."""


LoopTarget = Union[StateTarget, OutputVoltage]


@dataclass(frozen=True, eq=False)
class FeedbackGain:
    """State feedback selector ``K`` for closing one control input.

    ``K`` has shape ``(2+q) x n``; only row ``2+ctl_index`` is nonzero.
    ``feedthrough`` optionally holds the direct dependence of the fed-back
    variable on the block inputs (a single nonzero row as well); when it is
    ``None`` the feedback is pure state feedback.
    """

    K: np.ndarray
    ctl_index: int
    feedthrough: Optional[np.ndarray] = None
    reference_label: str = "ref"

    def __post_init__(self):
        K = np.array(self.K, dtype=float)
        if K.ndim != 2 or K.shape[0] < 3:
            raise DimensionMismatch(f"K must be (2+q) x n with q >= 1, got shape {K.shape}")
        row = 2 + int(self.ctl_index)
        if not 2 <= row < K.shape[0]:
            raise BadIndex(f"control index {self.ctl_index} out of range")
        others = np.delete(K, row, axis=0)
        if np.any(others != 0):
            raise DimensionMismatch("K may only be nonzero in the row of the closed control input")
        if not np.any(K[row] != 0):
            raise DimensionMismatch("K row of the closed control input is all zero")
        K.setflags(write=False)
        object.__setattr__(self, "K", K)
        object.__setattr__(self, "ctl_index", int(self.ctl_index))
        if self.feedthrough is not None:
            F = np.array(self.feedthrough, dtype=float)
            q2 = K.shape[0]
            if F.shape != (q2, q2):
                raise DimensionMismatch(f"feedthrough must be {q2}x{q2}, got {F.shape}")
            if np.any(np.delete(F, row, axis=0) != 0) or F[row, row] != 0:
                raise DimensionMismatch("feedthrough may only act from other inputs onto the closed input")
            F.setflags(write=False)
            object.__setattr__(self, "feedthrough", F)


def feedback_gain(target: LoopTarget, open_loop: StateSpaceBlock, ctl=0,
                  converter_c2=None, *, terminal: bool = False) -> FeedbackGain:
    """Selector matrix for closing control input ``ctl`` of ``open_loop``.

    ``StateTarget(i)`` feeds back state ``i``.  ``OutputVoltage()`` feeds back
    the ``v_out`` row of the open-loop output matrix, or ``converter_c2``
    padded with zeros over the remaining states when given.  With
    ``terminal=True`` the output-voltage feedback also includes the direct
    dependence of ``v_out`` on the other inputs, so the loop regulates the
    terminal voltage itself rather than its state-dependent part.
    """
    if open_loop.q == 0:
        raise NoControlInput("block has no control input to close")
    k = open_loop.control_index(ctl)
    row = 2 + k
    nx = open_loop.n
    K = np.zeros((2 + open_loop.q, nx))
    F = None
    if isinstance(target, StateTarget):
        i = open_loop.state_index(target.index)
        K[row, i] = 1.0
        label = f"ref:{open_loop.state_labels[i]}"
    elif isinstance(target, OutputVoltage):
        D = open_loop.D
        d23 = D[1, row]
        if abs(d23) > FEEDTHROUGH_TOL * max(1.0, np.linalg.norm(D)):
            raise FeedthroughNotNegligible(
                f"v_out depends directly on control input {open_loop.control_labels[k]!r} "
                f"(D23={d23:.3g}); output voltage cannot be taken from the states")
        if converter_c2 is None:
            K[row] = open_loop.C2
        else:
            c2 = np.asarray(converter_c2, dtype=float).reshape(-1)
            if c2.size > nx:
                raise DimensionMismatch(f"C2 has {c2.size} entries, block has {nx} states")
            K[row, :c2.size] = c2
        if terminal:
            F = np.zeros((2 + open_loop.q, 2 + open_loop.q))
            F[row] = D[1]
            F[row, row] = 0.0
            if not np.any(F):
                F = None
        label = "ref:v_out"
    else:
        raise TypeError(f"unsupported loop target {target!r}")
    return FeedbackGain(K, k, F, label)


def close_loop(open_loop: StateSpaceBlock, K: Union[FeedbackGain, np.ndarray],
               label: Optional[str] = None) -> StateSpaceBlock:
    """Close a loop with ``A_CL = A_OL - B_OL K``.

    ``B``, ``C`` and ``D`` are kept unchanged for pure state feedback.  A
    ``FeedbackGain`` carrying a feedthrough row additionally subtracts the
    reflected input terms from ``B`` and ``D`` (and the state terms from ``C``
    through the closed input's feedthrough column).
    A bare array is applied as pure state feedback without label changes.
    """
    if isinstance(K, FeedbackGain):
        gain = K
        Km = gain.K
    else:
        gain = None
        Km = np.asarray(K, dtype=float)
    if Km.shape != (2 + open_loop.q, open_loop.n):
        raise DimensionMismatch(
            f"K must be {2 + open_loop.q}x{open_loop.n} for this block, got {Km.shape}")

    A = open_loop.A - open_loop.B @ Km
    B, C, D = open_loop.B, open_loop.C, open_loop.D
    labels = list(open_loop.control_labels)
    if gain is not None:
        if gain.feedthrough is not None:
            F = gain.feedthrough
            C = C - D @ Km
            B = B - B @ F
            D = D - D @ F
        labels[gain.ctl_index] = label or gain.reference_label
    elif label is not None:
        raise ValueError("a label can only be set when closing with a FeedbackGain")
    return make_block(A, B, C, D, labels, open_loop.state_labels)


def _check_well_posed(source, load):
    den = 1.0 + load.D11 * source.D22
    if abs(den) <= WELL_POSED_TOL:
        raise IllPosedConnection(
            f"1 + D11_load*D22_source = {den:.3g}: the connection forms an algebraic loop")
    return den


def _labels(source, load):
    ctl = tuple("S." + s for s in source.control_labels) + tuple("L." + s for s in load.control_labels)
    states = tuple("S." + s for s in source.state_labels) + tuple("L." + s for s in load.state_labels)
    return ctl, states


def series_connect(source: StateSpaceBlock, load: StateSpaceBlock) -> StateSpaceBlock:
    """Output port of ``source`` feeding the input port of ``load``.

    States are stacked source first; inputs are ordered
    ``(v_in, i_out, ctl_source..., ctl_load...)``.  Labels are prefixed with
    ``S.`` and ``L.``.
    """
    den = _check_well_posed(source, load)
    AS, AL = source.A, load.A
    B1S, B2S, B3S = source.B1, source.B2, source.B3
    B1L, B2L, B3L = load.B1, load.B2, load.B3
    C1S, C2S, C1L, C2L = source.C1, source.C2, load.C1, load.C2
    D11S, D12S, D21S, D22S = source.D11, source.D12, source.D21, source.D22
    D11L, D12L, D21L, D22L = load.D11, load.D12, load.D21, load.D22
    D13S, D23S, D13L, D23L = source.D13, source.D23, load.D13, load.D23

    A = np.block([
        [AS - np.outer(B2S, C2S) * D11L / den, -np.outer(B2S, C1L) / den],
        [np.outer(B1L, C2S) / den, AL - np.outer(B1L, C1L) * D22S / den],
    ])
    B = np.block([
        [(B1S - B2S * D11L * D21S / den)[:, None], (-B2S * D12L / den)[:, None],
         B3S - np.outer(B2S, D23S) * D11L / den, -np.outer(B2S, D13L) / den],
        [(B1L * D21S / den)[:, None], (B2L - B1L * D22S * D12L / den)[:, None],
         np.outer(B1L, D23S) / den, B3L - np.outer(B1L, D13L) * D22S / den],
    ])
    C = np.vstack([
        np.concatenate([C1S - D12S * D11L * C2S / den, -D12S * C1L / den]),
        np.concatenate([D21L * C2S / den, C2L - D21L * D22S * C1L / den]),
    ])
    D = np.vstack([
        np.concatenate([[D11S - D12S * D11L * D21S / den, -D12S * D12L / den],
                        D13S - D12S * D11L * D23S / den, -D12S * D13L / den]),
        np.concatenate([[D21L * D21S / den, D22L - D21L * D22S * D12L / den],
                        D21L * D23S / den, D23L - D21L * D22S * D13L / den]),
    ])
    ctl, states = _labels(source, load)
    return make_block(A, B, C, D, ctl, states)


def series_connect_compact(source: StateSpaceBlock, load: StateSpaceBlock) -> StateSpaceBlock:
    """Same connection as :func:`series_connect`, written with the helper matrices.

    ``M1 = diag(B2_S, B1_L) H^-1``, ``M2 = diag(D12_S, D21_L) H^-1`` with
    ``H = [[D22_S, -1], [1, D11_L]]``, ``M_C = diag(C2_S, C1_L)`` and
    ``M_D = [diag(D21_S, D12_L) | diag(D23_S, D13_L)]``.
    """
    _check_well_posed(source, load)
    H = np.array([[source.D22, -1.0], [1.0, load.D11]])
    Hinv = np.linalg.inv(H)
    M1 = _blkdiag(source.B2[:, None], load.B1[:, None]) @ Hinv
    M2 = np.diag([source.D12, load.D21]) @ Hinv
    MC = _blkdiag(source.C2[None, :], load.C1[None, :])
    MD = np.hstack([np.diag([source.D21, load.D12]),
                    _blkdiag(source.D23[None, :], load.D13[None, :])])

    A = _blkdiag(source.A, load.A) - M1 @ MC
    B = np.hstack([_blkdiag(source.B1[:, None], load.B2[:, None]),
                   _blkdiag(source.B3, load.B3)]) - M1 @ MD
    C = _blkdiag(source.C1[None, :], load.C2[None, :]) - M2 @ MC
    D = np.hstack([np.diag([source.D11, load.D22]),
                   _blkdiag(source.D13[None, :], load.D23[None, :])]) - M2 @ MD
    ctl, states = _labels(source, load)
    return make_block(A, B, C, D, ctl, states)


def cascade(*blocks: StateSpaceBlock) -> StateSpaceBlock:
    """Left-to-right series connection of a source-to-load chain."""
    if not blocks:
        raise ValueError("cascade needs at least one block")
    out = blocks[0]
    for nxt in blocks[1:]:
        out = series_connect(out, nxt)
    return out
