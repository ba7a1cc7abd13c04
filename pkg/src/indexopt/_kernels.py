"""Fused loops for the hot path of the search; mirror the numpy code in solver.py."""

import numpy as np
from numba import njit


@njit(cache=True)
def select(g, nu, delta, lam, jmax, mu, xmax, z_star, has_star, m, r, xi, local_tuning):
    """Return ``(t0, M_t)``: 0-based interval with the first maximal
    characteristic and its Hölder estimate."""
    n = delta.shape[0]
    best = -np.inf
    best_i = 0
    best_M = 0.0
    feas = m + 1
    ratio = np.zeros(m + 1)
    for j in range(m + 1):
        if xmax[j] > 0.0:
            ratio[j] = mu[j] / xmax[j]
    for i in range(n):
        j = jmax[i]
        if local_tuning:
            gam = ratio[j - 1] * delta[i]
            M = lam[i]
            if gam > M:
                M = gam
        else:
            M = mu[j - 1]
        if xi > M:
            M = xi
        zl = g[i]
        zr = g[i + 1]
        nl = nu[i]
        nr = nu[i + 1]
        if has_star:
            if nl == feas:
                zl = zl - z_star
            if nr == feas:
                zr = zr - z_star
        rM = r * M
        d = delta[i]
        if nl == nr:
            R = d + (zr - zl) ** 2 / (rM**2 * d) - 2.0 * (zr + zl) / rM
        elif nr > nl:
            R = 2.0 * d - 4.0 * zr / rM
        else:
            R = 2.0 * d - 4.0 * zl / rM
        if R > best:
            best = R
            best_i = i
            best_M = M
    return best_i, best_M


@njit(cache=True)
def max_quotient(x, nu, g, j, x_new, g_new, n, start):
    """``max(start, |g - g_new| / |x - x_new|**(1/n))`` over trials with index ``j``."""
    out = start
    inv_n = 1.0 / n
    # cheap screen on q**n; the root is only taken for likely winners
    bound = out**n * (1.0 - 1e-9)
    for i in range(x.shape[0]):
        if nu[i] == j:
            dg = abs(g[i] - g_new)
            dx = abs(x[i] - x_new)
            if dg**n >= bound * dx:
                q = dg / dx**inv_n
                if q > out:
                    out = q
                    bound = out**n * (1.0 - 1e-9)
    return out
