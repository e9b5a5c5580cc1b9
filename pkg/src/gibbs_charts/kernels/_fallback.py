"""Pure numpy implementations of the hot loops.

Every function here has a twin with the same signature in ``_ckernels``.
"""
import numpy as np

TWO_PI = 2.0 * np.pi


def adjoint_step(weights, nu, tail, parent, n_prev):
    """One application of the dual transfer operator on a mass table.

    ``out[v] = weights[v] * sum(nu[w] for w with parent[w] == tail[v])``.
    """
    marg = np.bincount(parent, weights=nu, minlength=n_prev)
    return weights * marg[tail]


def transfer_step(weights, g, tail, parent, n_prev):
    """``out[w] = sum(weights[v] * g[v] for v with tail[v] == parent[w])``."""
    acc = np.bincount(tail, weights=weights * g, minlength=n_prev)
    return acc[parent]


def trig_eval(xy, freqs, a, b, const):
    """Evaluate ``const + sum a cos(2 pi k.x) + b sin(2 pi k.x)`` at rows of xy."""
    xy = np.asarray(xy, dtype=float)
    out = np.full(xy.shape[0], float(const))
    for t in range(freqs.shape[0]):
        th = TWO_PI * (xy[:, 0] * freqs[t, 0] + xy[:, 1] * freqs[t, 1])
        out += a[t] * np.cos(th) + b[t] * np.sin(th)
    return out


def stable_series(base, offsets, direction, lam, matrix, n_terms, freqs, a, b):
    """Sum over k < n_terms of f(M^k(p + d e)) - f(M^k p).

    ``e`` is an eigendirection of ``M`` with eigenvalue ``lam`` (|lam| < 1), so
    the k-th pair differs by ``d * lam**k * e``.
    """
    p = np.array(base, dtype=float, copy=True)
    p -= np.floor(p)
    d = np.array(offsets, dtype=float, copy=True)
    out = np.zeros(p.shape[0])
    kdir = TWO_PI * (freqs @ np.asarray(direction, dtype=float))
    m = np.asarray(matrix, dtype=float)
    for _ in range(n_terms):
        for t in range(freqs.shape[0]):
            th = TWO_PI * (p[:, 0] * freqs[t, 0] + p[:, 1] * freqs[t, 1])
            dl = kdir[t] * d
            out += a[t] * (np.cos(th + dl) - np.cos(th)) + b[t] * (np.sin(th + dl) - np.sin(th))
        p = p @ m.T
        p -= np.floor(p)
        d *= lam
    return out
