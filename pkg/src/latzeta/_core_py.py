"""Pure-numpy twin of the compiled core (`_core.pyx`).

Slower by roughly an order of magnitude on large windows; selected at import
time when the extension is not built.  Signatures and results match the
compiled versions exactly up to floating-point summation order.
"""

from __future__ import annotations

import numpy as np


def stencil_apply(src, dst, dxs, dys, probs, i0, i1, j0, j1):
    """dst[i, j] = sum_k probs[k] * src[i + dxs[k], j + dys[k]] on the window."""
    out = dst[i0:i1, j0:j1]
    np.multiply(probs[0], src[i0 + dxs[0] : i1 + dxs[0], j0 + dys[0] : j1 + dys[0]], out=out)
    for dx, dy, p in zip(dxs[1:], dys[1:], probs[1:]):
        out += p * src[i0 + dx : i1 + dx, j0 + dy : j1 + dy]


def window_dot(a, b, i0, i1, j0, j1) -> float:
    """Sum of a[i, j] * b[i, j] over the window."""
    return float(np.einsum("ij,ij->", a[i0:i1, j0:j1], b[i0:i1, j0:j1]))


def window_dot_pair(a, b, c, i0, i1, j0, j1):
    """(sum a*c, sum b*c) over the window."""
    cw = c[i0:i1, j0:j1]
    return (
        float(np.einsum("ij,ij->", a[i0:i1, j0:j1], cw)),
        float(np.einsum("ij,ij->", b[i0:i1, j0:j1], cw)),
    )


def window_sum(a, i0, i1, j0, j1) -> float:
    """Sum of a[i, j] over the window."""
    return float(a[i0:i1, j0:j1].sum())
