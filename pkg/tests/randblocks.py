"""Random two-port blocks for property tests."""

import numpy as np

from convblocks import make_block


def random_block(rng, n=None, q=None, prefix="b", stable=False):
    n = int(rng.integers(0, 4)) if n is None else n
    q = int(rng.integers(0, 3)) if q is None else q
    A = rng.normal(size=(n, n))
    if stable and n:
        # shift the spectrum into the left half plane
        A -= (np.max(np.linalg.eigvals(A).real) + 0.5 + rng.random()) * np.eye(n)
    B = rng.normal(size=(n, 2 + q))
    C = rng.normal(size=(2, n))
    D = rng.normal(size=(2, 2 + q))
    return make_block(A, B, C, D, [f"{prefix}u{i}" for i in range(q)],
                      [f"{prefix}x{i}" for i in range(n)])


def random_pair(rng, min_den=0.1, **kw):
    """Source/load pair whose connection is well posed with margin ``min_den``."""
    while True:
        src = random_block(rng, prefix="s", **kw)
        load = random_block(rng, prefix="l", **kw)
        if abs(1.0 + load.D11 * src.D22) > min_den:
            return src, load


def interconnect_response(Gs, Gl):
    """Terminal response of two connected two-ports from their responses alone.

    Unknowns per input column: (i_in, v_mid, i_mid, v_out) where ``v_mid`` is
    the shared port voltage and ``i_mid`` the current into the source output
    port, which equals minus the current into the load input port.
    """
    qs, ql = Gs.shape[1] - 2, Gl.shape[1] - 2
    ncols = 2 + qs + ql
    M = np.array([
        [1, 0, -Gs[0, 1], 0],
        [0, 1, -Gs[1, 1], 0],
        [0, Gl[0, 0], 1, 0],
        [0, -Gl[1, 0], 0, 1],
    ], dtype=complex)
    rhs = np.zeros((4, ncols), dtype=complex)
    # columns: v_in, i_out, source controls, load controls
    rhs[0, 0], rhs[1, 0] = Gs[0, 0], Gs[1, 0]
    rhs[2, 1], rhs[3, 1] = -Gl[0, 1], Gl[1, 1]
    rhs[0, 2:2 + qs], rhs[1, 2:2 + qs] = Gs[0, 2:], Gs[1, 2:]
    rhs[2, 2 + qs:], rhs[3, 2 + qs:] = -Gl[0, 2:], Gl[1, 2:]
    sol = np.linalg.solve(M, rhs)
    return sol[[0, 3]]
