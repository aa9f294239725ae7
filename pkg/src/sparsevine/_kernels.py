"""Numba kernels for penalized least squares via cyclic coordinate descent.

Everything here works on the Gram formulation: with G = X'X / n and
c = X'y / n, one coordinate update costs O(p) independent of n, which makes
warm-started paths over a 100-point grid cheap. The kernels release the GIL
so distinct problems can run on a thread pool.
"""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def cd_solve_gram(G, c, w, lam, phi, resid, tol, max_sweeps):
    """Cyclic coordinate descent on the Gram system, in place.

    Minimizes (1/2n)||y - X phi||^2 + lam * sum_l w[l] * |phi[l]| for the
    problem encoded by ``G = X'X/n`` and ``c = X'y/n``. ``resid`` must hold
    ``c - G @ phi`` on entry and is kept consistent; ``w[l] = inf`` freezes
    coordinate ``l`` at zero, ``w[l] = 0`` leaves it unpenalized.

    Returns the number of sweeps used (== max_sweeps when the tolerance on
    the largest coordinate change was never reached).
    """
    p = G.shape[0]
    for sweep in range(max_sweeps):
        biggest = 0.0
        for l in range(p):
            wl = w[l]
            gll = G[l, l]
            if wl == np.inf or gll <= 0.0:
                continue
            old = phi[l]
            marginal = resid[l] + gll * old
            threshold = lam * wl
            if marginal > threshold:
                new = (marginal - threshold) / gll
            elif marginal < -threshold:
                new = (marginal + threshold) / gll
            else:
                new = 0.0
            if new != old:
                diff = new - old
                for k in range(p):
                    resid[k] -= G[k, l] * diff
                phi[l] = new
                if abs(diff) > biggest:
                    biggest = abs(diff)
        if biggest < tol:
            return sweep + 1
    return max_sweeps


@njit(cache=True, nogil=True)
def cd_path_gram(G, c, w, grid, tol, max_sweeps):
    """Warm-started solves along a descending penalty grid.

    Returns an (n_grid, p) array of coefficient vectors, one row per grid
    value, computed with a single coefficient/residual state carried down
    the grid.
    """
    n_grid = grid.shape[0]
    p = G.shape[0]
    coefs = np.zeros((n_grid, p))
    phi = np.zeros(p)
    resid = c.copy()
    for g in range(n_grid):
        cd_solve_gram(G, c, w, grid[g], phi, resid, tol, max_sweeps)
        for l in range(p):
            coefs[g, l] = phi[l]
    return coefs
