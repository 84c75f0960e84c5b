"""Float kernels for dilatation sweeps: numba when available, numpy otherwise.

Set FLATLAB_NO_NUMBA=1 to force the numpy versions.
"""

from __future__ import annotations

import os

import numpy as np

__all__ = ["USING_NUMBA", "close_map_grid", "triangle_dilatations", "dilatation_from_jacobian"]


def dilatation_from_jacobian(j11, j12, j21, j22):
    """K = (s + sqrt(s^2 - 4)) / 2 with s = |J|_F^2 / |det J|, vectorised."""
    f2 = j11 * j11 + j12 * j12 + j21 * j21 + j22 * j22
    det = np.abs(j11 * j22 - j12 * j21)
    s = f2 / det
    return 0.5 * (s + np.sqrt(np.maximum(s * s - 4.0, 0.0)))


def _close_map_grid_np(theta, fvals, fprime, heights, r1, r2, shift):
    h = heights[None, :]
    j11 = (h / r1) * (1.0 - fprime[:, None]) + fprime[:, None]
    j12 = np.broadcast_to(((theta + shift - fvals) / r1)[:, None], j11.shape)
    j21 = np.zeros_like(j11)
    j22 = np.full_like(j11, r2 / r1)
    k = dilatation_from_jacobian(j11, j12, j21, j22)
    flat = int(np.argmax(k))
    i, j = divmod(flat, k.shape[1])
    return float(k[i, j]), i, j


def _triangle_dilatations_np(ref, tris):
    p = ref[1:] - ref[0]  # rows are edge vectors
    q = tris[:, 1:, :] - tris[:, :1, :]
    pinv = np.linalg.inv(p.T)
    m = np.einsum("nij,jk->nik", np.transpose(q, (0, 2, 1)), pinv)
    k = dilatation_from_jacobian(m[:, 0, 0], m[:, 0, 1], m[:, 1, 0], m[:, 1, 1])
    e = np.stack(
        [tris[:, 1] - tris[:, 0], tris[:, 2] - tris[:, 1], tris[:, 0] - tris[:, 2]], axis=1
    )
    lengths = np.sqrt((e * e).sum(axis=2))
    area = 0.5 * np.abs(e[:, 0, 0] * e[:, 1, 1] - e[:, 0, 1] * e[:, 1, 0])
    radius = lengths.prod(axis=1) / (4.0 * area)
    return k, lengths.min(axis=1), radius


def _load_numba():
    if os.environ.get("FLATLAB_NO_NUMBA", "") not in ("", "0"):
        return None
    try:
        from numba import njit
    except ImportError:
        return None
    return njit


_njit = _load_numba()
USING_NUMBA = _njit is not None

if USING_NUMBA:

    @_njit(cache=True)
    def _k_scalar(j11, j12, j21, j22):
        f2 = j11 * j11 + j12 * j12 + j21 * j21 + j22 * j22
        det = abs(j11 * j22 - j12 * j21)
        s = f2 / det
        disc = s * s - 4.0
        if disc < 0.0:
            disc = 0.0
        return 0.5 * (s + np.sqrt(disc))

    @_njit(cache=True)
    def _close_map_grid_nb(theta, fvals, fprime, heights, r1, r2, shift):
        best = -1.0
        bi = 0
        bj = 0
        j22 = r2 / r1
        for i in range(theta.shape[0]):
            j12 = (theta[i] + shift - fvals[i]) / r1
            for j in range(heights.shape[0]):
                j11 = (heights[j] / r1) * (1.0 - fprime[i]) + fprime[i]
                k = _k_scalar(j11, j12, 0.0, j22)
                if k > best:
                    best = k
                    bi = i
                    bj = j
        return best, bi, bj

    @_njit(cache=True)
    def _triangle_dilatations_nb(ref, tris):
        n = tris.shape[0]
        ks = np.empty(n)
        eps = np.empty(n)
        rad = np.empty(n)
        p00 = ref[1, 0] - ref[0, 0]
        p10 = ref[1, 1] - ref[0, 1]
        p01 = ref[2, 0] - ref[0, 0]
        p11 = ref[2, 1] - ref[0, 1]
        pdet = p00 * p11 - p01 * p10
        i00 = p11 / pdet
        i01 = -p01 / pdet
        i10 = -p10 / pdet
        i11 = p00 / pdet
        for t in range(n):
            q00 = tris[t, 1, 0] - tris[t, 0, 0]
            q10 = tris[t, 1, 1] - tris[t, 0, 1]
            q01 = tris[t, 2, 0] - tris[t, 0, 0]
            q11 = tris[t, 2, 1] - tris[t, 0, 1]
            m00 = q00 * i00 + q01 * i10
            m01 = q00 * i01 + q01 * i11
            m10 = q10 * i00 + q11 * i10
            m11 = q10 * i01 + q11 * i11
            ks[t] = _k_scalar(m00, m01, m10, m11)
            a = np.hypot(q00, q10)
            b = np.hypot(tris[t, 2, 0] - tris[t, 1, 0], tris[t, 2, 1] - tris[t, 1, 1])
            c = np.hypot(q01, q11)
            area = 0.5 * abs(q00 * q11 - q01 * q10)
            eps[t] = min(a, min(b, c))
            rad[t] = a * b * c / (4.0 * area)
        return ks, eps, rad


def close_map_grid(theta, fvals, fprime, heights, r1, r2, shift):
    """Largest pointwise dilatation of the cylinder map over a (theta, h) grid."""
    args = (
        np.ascontiguousarray(theta, dtype=np.float64),
        np.ascontiguousarray(fvals, dtype=np.float64),
        np.ascontiguousarray(fprime, dtype=np.float64),
        np.ascontiguousarray(heights, dtype=np.float64),
        float(r1),
        float(r2),
        float(shift),
    )
    if USING_NUMBA:
        k, i, j = _close_map_grid_nb(*args)
        return float(k), int(i), int(j)
    return _close_map_grid_np(*args)


def triangle_dilatations(ref, tris):
    """Dilatation, shortest side and circumradius for each triangle in ``tris`` (N, 3, 2)."""
    ref = np.ascontiguousarray(ref, dtype=np.float64)
    tris = np.ascontiguousarray(tris, dtype=np.float64)
    if USING_NUMBA:
        return _triangle_dilatations_nb(ref, tris)
    return _triangle_dilatations_np(ref, tris)
