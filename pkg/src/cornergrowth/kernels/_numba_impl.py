"""Numba implementations of the hot numeric kernels.

Every function here has a pure-numpy twin in ``_numpy_impl`` with the
same signature and semantics; ``cornergrowth.kernels`` picks one of the
two at import time.
"""

import numpy as np
from numba import njit

NEG_INF = -np.inf


@njit(cache=True, nogil=True)
def _lae(a, b):
    # log(exp(a) + exp(b)), stable
    if a == NEG_INF:
        return b
    if b == NEG_INF:
        return a
    m = a if a > b else b
    return m + np.log1p(np.exp(-abs(a - b)))


@njit(cache=True, nogil=True)
def forward_log_counts(allowed):
    M, N = allowed.shape
    f = np.full((M, N), NEG_INF)
    if allowed[0, 0]:
        f[0, 0] = 0.0
    for j in range(N):
        for i in range(M):
            if i == 0 and j == 0:
                continue
            if not allowed[i, j]:
                continue
            left = f[i - 1, j] if i > 0 else NEG_INF
            down = f[i, j - 1] if j > 0 else NEG_INF
            f[i, j] = _lae(left, down)
    return f


@njit(cache=True, nogil=True)
def backward_log_counts(allowed):
    M, N = allowed.shape
    b = np.full((M, N), NEG_INF)
    if allowed[M - 1, N - 1]:
        b[M - 1, N - 1] = 0.0
    for j in range(N - 1, -1, -1):
        for i in range(M - 1, -1, -1):
            if i == M - 1 and j == N - 1:
                continue
            if not allowed[i, j]:
                continue
            right = b[i + 1, j] if i + 1 < M else NEG_INF
            up = b[i, j + 1] if j + 1 < N else NEG_INF
            b[i, j] = _lae(right, up)
    return b


@njit(cache=True, nogil=True)
def sample_energies(blog, weights, uniforms):
    """Energies of uniform paths; one uniform consumed per step.

    ``blog`` is the log backward-count table with -inf at blocked cells.
    A step goes right with probability B(i+1,j) / (B(i+1,j) + B(i,j+1)).
    """
    M, N = blog.shape
    n, steps = uniforms.shape
    out = np.empty(n)
    for t in range(n):
        i = 0
        j = 0
        e = weights[0, 0]
        for s in range(steps):
            right = blog[i + 1, j] if i + 1 < M else NEG_INF
            up = blog[i, j + 1] if j + 1 < N else NEG_INF
            if up == NEG_INF:
                p_right = 1.0
            elif right == NEG_INF:
                p_right = 0.0
            else:
                p_right = 1.0 / (1.0 + np.exp(up - right))
            if uniforms[t, s] < p_right:
                i += 1
            else:
                j += 1
            e += weights[i, j]
        out[t] = e
    return out


@njit(cache=True, nogil=True)
def sample_steps(blog, uniforms):
    """Step sequences (0 = right, 1 = up) of uniform paths."""
    M, N = blog.shape
    n, steps = uniforms.shape
    out = np.empty((n, steps), dtype=np.uint8)
    for t in range(n):
        i = 0
        j = 0
        for s in range(steps):
            right = blog[i + 1, j] if i + 1 < M else NEG_INF
            up = blog[i, j + 1] if j + 1 < N else NEG_INF
            if up == NEG_INF:
                p_right = 1.0
            elif right == NEG_INF:
                p_right = 0.0
            else:
                p_right = 1.0 / (1.0 + np.exp(up - right))
            if uniforms[t, s] < p_right:
                i += 1
                out[t, s] = 0
            else:
                j += 1
                out[t, s] = 1
        # (i, j) ends at (M-1, N-1) by construction
    return out


@njit(cache=True, nogil=True)
def lpp_grid(weights):
    """G(i,j) = w(i,j) + max(G(i-1,j), G(i,j-1)) over the full rectangle."""
    M, N = weights.shape
    g = np.empty((M, N))
    g[0, 0] = weights[0, 0]
    for i in range(1, M):
        g[i, 0] = g[i - 1, 0] + weights[i, 0]
    for j in range(1, N):
        g[0, j] = g[0, j - 1] + weights[0, j]
        for i in range(1, M):
            best = g[i - 1, j] if g[i - 1, j] >= g[i, j - 1] else g[i, j - 1]
            g[i, j] = best + weights[i, j]
    return g


@njit(cache=True, nogil=True)
def polymer_log_grid(weights, beta):
    """logZ(i,j) = beta*w(i,j) + logaddexp(logZ(i-1,j), logZ(i,j-1))."""
    M, N = weights.shape
    z = np.empty((M, N))
    z[0, 0] = beta * weights[0, 0]
    for i in range(1, M):
        z[i, 0] = z[i - 1, 0] + beta * weights[i, 0]
    for j in range(1, N):
        z[0, j] = z[0, j - 1] + beta * weights[0, j]
        for i in range(1, M):
            z[i, j] = _lae(z[i - 1, j], z[i, j - 1]) + beta * weights[i, j]
    return z
