"""Pure-numpy fallback implementations of the hot kernels.

Same signatures and semantics as ``_numba_impl``.  DP recurrences are
vectorized along columns or anti-diagonals; per-path sampling is
vectorized across paths, one step at a time.
"""

import numpy as np

NEG_INF = -np.inf


def _runs(mask):
    """Maximal runs of True in a 1-d boolean array, as (start, stop) pairs."""
    idx = np.flatnonzero(np.diff(np.concatenate(([False], mask, [False])).astype(np.int8)))
    return list(zip(idx[::2], idx[1::2]))


def forward_log_counts(allowed):
    allowed = np.asarray(allowed, dtype=bool)
    M, N = allowed.shape
    f = np.full((M, N), NEG_INF)
    if allowed[0, 0]:
        f[0, 0] = 0.0
    for i in range(1, M):
        f[i, 0] = f[i - 1, 0] if allowed[i, 0] else NEG_INF
    for j in range(1, N):
        a = f[:, j - 1]
        col = np.full(M, NEG_INF)
        for s, e in _runs(allowed[:, j]):
            col[s:e] = np.logaddexp.accumulate(a[s:e])
        f[:, j] = col
    return f


def backward_log_counts(allowed):
    allowed = np.asarray(allowed, dtype=bool)
    M, N = allowed.shape
    b = np.full((M, N), NEG_INF)
    if allowed[M - 1, N - 1]:
        b[M - 1, N - 1] = 0.0
    for i in range(M - 2, -1, -1):
        b[i, N - 1] = b[i + 1, N - 1] if allowed[i, N - 1] else NEG_INF
    for j in range(N - 2, -1, -1):
        a = b[:, j + 1]
        col = np.full(M, NEG_INF)
        for s, e in _runs(allowed[:, j]):
            col[s:e] = np.logaddexp.accumulate(a[s:e][::-1])[::-1]
        b[:, j] = col
    return b


def _step_probs(blp, I, J):
    right = blp[I + 1, J]
    up = blp[I, J + 1]
    with np.errstate(over="ignore", invalid="ignore"):
        p = 1.0 / (1.0 + np.exp(up - right))
    p = np.where(up == NEG_INF, 1.0, p)
    p = np.where((right == NEG_INF) & (up != NEG_INF), 0.0, p)
    return p


def sample_energies(blog, weights, uniforms):
    M, N = blog.shape
    n, steps = uniforms.shape
    blp = np.full((M + 1, N + 1), NEG_INF)
    blp[:M, :N] = blog
    I = np.zeros(n, dtype=np.int64)
    J = np.zeros(n, dtype=np.int64)
    e = np.full(n, weights[0, 0])
    for s in range(steps):
        go_right = uniforms[:, s] < _step_probs(blp, I, J)
        I += go_right
        J += ~go_right
        e += weights[I, J]
    return e


def sample_steps(blog, uniforms):
    M, N = blog.shape
    n, steps = uniforms.shape
    blp = np.full((M + 1, N + 1), NEG_INF)
    blp[:M, :N] = blog
    I = np.zeros(n, dtype=np.int64)
    J = np.zeros(n, dtype=np.int64)
    out = np.empty((n, steps), dtype=np.uint8)
    for s in range(steps):
        go_right = uniforms[:, s] < _step_probs(blp, I, J)
        out[:, s] = np.where(go_right, 0, 1)
        I += go_right
        J += ~go_right
    return out


def _diag_scan(weights, combine, scale=1.0):
    M, N = weights.shape
    g = np.empty((M, N))
    g[0, 0] = scale * weights[0, 0]
    for k in range(1, M + N - 1):
        lo = max(0, k - (N - 1))
        hi = min(M - 1, k)
        ii = np.arange(lo, hi + 1)
        jj = k - ii
        left = np.where(ii > 0, g[np.maximum(ii - 1, 0), jj], NEG_INF)
        down = np.where(jj > 0, g[ii, np.maximum(jj - 1, 0)], NEG_INF)
        g[ii, jj] = combine(left, down) + scale * weights[ii, jj]
    return g


def lpp_grid(weights):
    return _diag_scan(np.asarray(weights, dtype=np.float64), np.maximum)


def polymer_log_grid(weights, beta):
    return _diag_scan(np.asarray(weights, dtype=np.float64), np.logaddexp, scale=float(beta))
