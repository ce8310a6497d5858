"""Hot numeric kernels: channels-last 1-D convolution and trilinear lookup.

Every kernel has two implementations with identical signatures:

* ``*_numpy``: vectorised numpy (im2col + BLAS, ``searchsorted``);
* ``*_jit``: explicit loops compiled by numba (plain Python if numba is absent).

The public names (``conv1d_forward`` ...) point at one of them according to
:data:`chfnet._jit.USE_NUMBA`. Both paths agree to rounding error, not
bitwise, so a given run is reproducible only within one path.

Layouts
-------
x : (n, length, c_in)       activations, channels last
w : (k, c_in, c_out)        convolution kernel
b : (c_out,)
out : (n, length + 2*pad - k + 1, c_out)
"""
import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ._jit import USE_NUMBA, njit

__all__ = [
    "conv1d_forward",
    "conv1d_backward",
    "trilinear",
    "conv1d_forward_numpy",
    "conv1d_backward_numpy",
    "trilinear_numpy",
    "conv1d_forward_jit",
    "conv1d_backward_jit",
    "trilinear_jit",
]


# ---------------------------------------------------------------------------
# numpy path

def _pad(x, pad):
    if pad == 0:
        return x
    return np.pad(x, ((0, 0), (pad, pad), (0, 0)))


def _im2col(x, k, pad):
    xp = _pad(x, pad)
    # (n, l_out, c_in, k) -> (n, l_out, k, c_in) so the flat column index is k*c_in + c
    win = sliding_window_view(xp, k, axis=1).transpose(0, 1, 3, 2)
    n, l_out = win.shape[:2]
    return np.ascontiguousarray(win).reshape(n * l_out, -1), l_out


def conv1d_forward_numpy(x, w, b, pad):
    k, c_in, c_out = w.shape
    n = x.shape[0]
    cols, l_out = _im2col(x, k, pad)
    out = cols @ w.reshape(k * c_in, c_out)
    out += b
    return out.reshape(n, l_out, c_out)


def conv1d_backward_numpy(x, w, grad_out, pad):
    """Return ``(grad_x, grad_w, grad_b)`` for :func:`conv1d_forward_numpy`."""
    k, c_in, c_out = w.shape
    n, length, _ = x.shape
    cols, l_out = _im2col(x, k, pad)
    g2 = grad_out.reshape(n * l_out, c_out)
    grad_w = (cols.T @ g2).reshape(k, c_in, c_out)
    grad_b = g2.sum(axis=0)
    gcols = (g2 @ w.reshape(k * c_in, c_out).T).reshape(n, l_out, k, c_in)
    gxp = np.zeros((n, length + 2 * pad, c_in))
    for j in range(k):
        gxp[:, j:j + l_out, :] += gcols[:, :, j, :]
    return gxp[:, pad:pad + length, :], grad_w, grad_b


def trilinear_numpy(a0, a1, a2, values, q0, q1, q2):
    """Trilinear interpolation of ``values`` on the grid ``a0 x a1 x a2``.

    Queries must already be inside the grid (closed intervals); range checking
    is the caller's job.
    """
    def locate(axis, q):
        i = np.clip(np.searchsorted(axis, q, side="right") - 1, 0, len(axis) - 2)
        t = (q - axis[i]) / (axis[i + 1] - axis[i])
        return i, t

    i, ti = locate(a0, q0)
    j, tj = locate(a1, q1)
    k, tk = locate(a2, q2)
    out = np.zeros(np.shape(q0))
    for di, wi in ((0, 1.0 - ti), (1, ti)):
        for dj, wj in ((0, 1.0 - tj), (1, tj)):
            for dk, wk in ((0, 1.0 - tk), (1, tk)):
                out += wi * wj * wk * values[i + di, j + dj, k + dk]
    return out


# ---------------------------------------------------------------------------
# numba path

@njit(cache=True)
def conv1d_forward_jit(x, w, b, pad):
    k, c_in, c_out = w.shape
    n, length, _ = x.shape
    l_out = length + 2 * pad - k + 1
    cols = np.zeros((n * l_out, k * c_in))
    for s in range(n):
        for t in range(l_out):
            row = s * l_out + t
            for j in range(k):
                src = t + j - pad
                if 0 <= src < length:
                    for c in range(c_in):
                        cols[row, j * c_in + c] = x[s, src, c]
    out = np.dot(cols, np.ascontiguousarray(w).reshape(k * c_in, c_out))
    for r in range(n * l_out):
        for o in range(c_out):
            out[r, o] += b[o]
    return out.reshape(n, l_out, c_out)


@njit(cache=True)
def conv1d_backward_jit(x, w, grad_out, pad):
    k, c_in, c_out = w.shape
    n, length, _ = x.shape
    l_out = length + 2 * pad - k + 1
    cols = np.zeros((n * l_out, k * c_in))
    for s in range(n):
        for t in range(l_out):
            row = s * l_out + t
            for j in range(k):
                src = t + j - pad
                if 0 <= src < length:
                    for c in range(c_in):
                        cols[row, j * c_in + c] = x[s, src, c]
    g2 = np.ascontiguousarray(grad_out).reshape(n * l_out, c_out)
    w2 = np.ascontiguousarray(w).reshape(k * c_in, c_out)
    grad_w = np.dot(cols.T, g2).reshape(k, c_in, c_out)
    grad_b = np.zeros(c_out)
    for r in range(n * l_out):
        for o in range(c_out):
            grad_b[o] += g2[r, o]
    gcols = np.dot(g2, w2.T)
    grad_x = np.zeros((n, length, c_in))
    for s in range(n):
        for t in range(l_out):
            row = s * l_out + t
            for j in range(k):
                src = t + j - pad
                if 0 <= src < length:
                    for c in range(c_in):
                        grad_x[s, src, c] += gcols[row, j * c_in + c]
    return grad_x, grad_w, grad_b


@njit(cache=True)
def _bracket(axis, q):
    # largest i with axis[i] <= q, capped so that i + 1 is valid
    lo = 0
    hi = axis.shape[0] - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if axis[mid] <= q:
            lo = mid
        else:
            hi = mid
    return lo, (q - axis[lo]) / (axis[lo + 1] - axis[lo])


@njit(cache=True)
def _trilinear_flat(a0, a1, a2, values, q0, q1, q2):
    out = np.empty(q0.shape[0])
    for m in range(q0.shape[0]):
        i, ti = _bracket(a0, q0[m])
        j, tj = _bracket(a1, q1[m])
        k, tk = _bracket(a2, q2[m])
        acc = 0.0
        for di in range(2):
            wi = ti if di else 1.0 - ti
            for dj in range(2):
                wj = tj if dj else 1.0 - tj
                for dk in range(2):
                    wk = tk if dk else 1.0 - tk
                    acc += wi * wj * wk * values[i + di, j + dj, k + dk]
        out[m] = acc
    return out


def trilinear_jit(a0, a1, a2, values, q0, q1, q2):
    q0, q1, q2 = np.broadcast_arrays(*(np.asarray(q, dtype=np.float64) for q in (q0, q1, q2)))
    shape = q0.shape
    out = _trilinear_flat(a0, a1, a2, values, q0.ravel(), q1.ravel(), q2.ravel())
    return out.reshape(shape)


if USE_NUMBA:
    conv1d_forward = conv1d_forward_jit
    conv1d_backward = conv1d_backward_jit
    trilinear = trilinear_jit
else:
    conv1d_forward = conv1d_forward_numpy
    conv1d_backward = conv1d_backward_numpy
    trilinear = trilinear_numpy
