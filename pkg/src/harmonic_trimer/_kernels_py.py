"""Pure numpy implementation of the kinetic-operator kernels.

Array conventions shared with the compiled module ``_kernels``:

``u``                coefficient cube indexed ``[i, j, k]`` (x, y, z axes)
``D``                ``D[a, n] = f_a'(x_n)``
``g1, g2, g3``       axis grids, ``lambda_n * A_pp / h^2`` at the mesh points
``w12, w13, w23``    cross grids, ``sqrt(lambda_p lambda_q) * A_pq / h^2``

The bracketed sum of the kinetic matrix element is

    out = D_x(g1*tx + w12*ty + w13*tz) + D_y(g2*ty + w12*tx + w23*tz)
        + D_z(g3*tz + w13*tx + w23*ty)

with ``tp = D^T`` applied along axis ``p`` and ``D_q`` applying ``D`` along axis ``q``.
"""

import numpy as np


def _along(mat, u, axis):
    if axis == 0:
        m = u.shape[0]
        return (mat @ u.reshape(m, -1)).reshape(u.shape)
    if axis == 1:
        return np.matmul(mat, u)
    return u @ mat.T


def kinetic_apply(u, D, g1, g2, g3, w12, w13, w23):
    Dt = np.ascontiguousarray(D.T)
    tx = _along(Dt, u, 0)
    ty = _along(Dt, u, 1)
    tz = _along(Dt, u, 2)
    out = _along(D, g1 * tx + w12 * ty + w13 * tz, 0)
    out += _along(D, g2 * ty + w12 * tx + w23 * tz, 1)
    out += _along(D, g3 * tz + w13 * tx + w23 * ty, 2)
    return out


def kinetic_diagonal(D, g1, g2, g3, w12, w13, w23):
    """Diagonal of the bracketed kinetic sum."""
    D2 = D * D
    dd = np.diag(D)
    out = np.einsum("in,njk->ijk", D2, g1)
    out += np.einsum("jn,ink->ijk", D2, g2)
    out += np.einsum("kn,ijn->ijk", D2, g3)
    out += 2.0 * dd[:, None, None] * dd[None, :, None] * w12
    out += 2.0 * dd[:, None, None] * dd[None, None, :] * w13
    out += 2.0 * dd[None, :, None] * dd[None, None, :] * w23
    return out
