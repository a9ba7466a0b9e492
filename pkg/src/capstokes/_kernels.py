"""Compiled O(N^2) loops for the principal-value operators.

All kernels release the GIL so that row blocks can run on a thread pool.
Each output node is produced by one fixed-order loop, so results do not
depend on how rows are split across threads.
"""
import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def _pair_kernel(t0, period, n_img, db, A2, n, m):
    # sum over |p| <= n_img of (1/t) prod(db/t) / prod(1 + A2/t^2), t = t0 + p*period
    acc = 0.0
    for p in range(-n_img, n_img + 1):
        inv = 1.0 / (t0 + p * period)
        inv2 = inv * inv
        num = inv
        for i in range(n):
            num *= db[i] * inv
        den = 1.0
        for i in range(m):
            den *= 1.0 + A2[i] * inv2
        acc += num / den
    return acc


@njit(cache=True, nogil=True)
def b_rows_periodic(row0, row1, a, b, H, out, dx, period, n_img, tail):
    """Rows ``row0:row1`` of the periodic sum (without the ``dx`` factor).

    ``tail[o + N//2, k]`` holds ``sum_{|p|>n_img} (o*dx + p*period)^-(n+1+2k)``
    for signed offsets ``o``; the far images are summed through the
    expansion of ``prod 1/(1 + A2_i/t^2)`` in powers of ``1/t^2``.
    """
    m = a.shape[0]
    n = b.shape[0]
    nh = H.shape[0]
    N = H.shape[1]
    J = tail.shape[1] - 1
    half = N // 2
    omax = half if N % 2 == 0 else (N - 1) // 2
    db = np.empty(n)
    A2 = np.empty(m)
    c = np.empty(J + 1)
    acc = np.empty(nh)
    pair = np.empty(nh)
    for j in range(row0, row1):
        for q in range(nh):
            acc[q] = 0.0
        for o in range(1, omax + 1):
            w = 0.5 if (N % 2 == 0 and o == half) else 1.0
            for q in range(nh):
                pair[q] = 0.0
            for sgn in (1, -1):
                so = sgn * o
                i2 = (j - so) % N
                prodb = 1.0
                for i in range(n):
                    db[i] = b[i, j] - b[i, i2]
                    prodb *= db[i]
                for i in range(m):
                    d = a[i, j] - a[i, i2]
                    A2[i] = d * d
                kern = _pair_kernel(so * dx, period, n_img, db, A2, n, m)
                c[0] = 1.0
                for k in range(1, J + 1):
                    c[k] = 0.0
                for i in range(m):
                    for k in range(1, J + 1):
                        c[k] = c[k] - A2[i] * c[k - 1]
                far = 0.0
                for k in range(J + 1):
                    far += c[k] * tail[so + half, k]
                kern += prodb * far
                for q in range(nh):
                    pair[q] += kern * H[q, i2]
            for q in range(nh):
                acc[q] += w * pair[q]
        for q in range(nh):
            out[q, j] = acc[q]


@njit(cache=True, nogil=True)
def b_rows_line(row0, row1, a, b, H, out, dx):
    """Rows ``row0:row1`` of the truncated line sum (without the ``dx`` factor)."""
    m = a.shape[0]
    n = b.shape[0]
    nh = H.shape[0]
    N = H.shape[1]
    acc = np.empty(nh)
    pair = np.empty(nh)
    for j in range(row0, row1):
        for q in range(nh):
            acc[q] = 0.0
        for o in range(1, N):
            if j - o < 0 and j + o >= N:
                break
            inv = 1.0 / (o * dx)
            inv2 = inv * inv
            for q in range(nh):
                pair[q] = 0.0
            for sgn in (1, -1):
                i2 = j - sgn * o
                if i2 < 0 or i2 >= N:
                    continue
                num = sgn * inv
                for i in range(n):
                    num *= (b[i, j] - b[i, i2]) * sgn * inv
                den = 1.0
                for i in range(m):
                    d = a[i, j] - a[i, i2]
                    den *= 1.0 + d * d * inv2
                kern = num / den
                for q in range(nh):
                    pair[q] += kern * H[q, i2]
            for q in range(nh):
                acc[q] += pair[q]
        for q in range(nh):
            out[q, j] = acc[q]
