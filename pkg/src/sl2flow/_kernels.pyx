# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Dormand-Prince 5(4) kernel; see ``_kernels_py`` for the reference twin."""
from libc.math cimport sqrt, fabs, pow, nextafter, INFINITY
from libc.stdlib cimport malloc, realloc, free

import numpy as np

cdef enum:
    NMAX = 8

cdef int AMBIENT = 0, HAMSYS = 1, HAMSYS2 = 2, HAMSYS3 = 3

cdef double C_A21 = 1.0 / 5
cdef double C_A31 = 3.0 / 40, C_A32 = 9.0 / 40
cdef double C_A41 = 44.0 / 45, C_A42 = -56.0 / 15, C_A43 = 32.0 / 9
cdef double C_A51 = 19372.0 / 6561, C_A52 = -25360.0 / 2187, C_A53 = 64448.0 / 6561, C_A54 = -212.0 / 729
cdef double C_A61 = 9017.0 / 3168, C_A62 = -355.0 / 33, C_A63 = 46732.0 / 5247
cdef double C_A64 = 49.0 / 176, C_A65 = -5103.0 / 18656
cdef double C_A71 = 35.0 / 384, C_A73 = 500.0 / 1113, C_A74 = 125.0 / 192
cdef double C_A75 = -2187.0 / 6784, C_A76 = 11.0 / 84
cdef double C_E1 = 71.0 / 57600, C_E3 = -71.0 / 16695, C_E4 = 71.0 / 1920
cdef double C_E5 = -17253.0 / 339200, C_E6 = 22.0 / 525, C_E7 = -1.0 / 40
cdef double C_D1 = -12715105075.0 / 11282082432, C_D3 = 87487479700.0 / 32700410799
cdef double C_D4 = -10690763975.0 / 1880347072, C_D5 = 701980252875.0 / 199316789632
cdef double C_D6 = -1453857185.0 / 822651844, C_D7 = 69997945.0 / 29380423

cdef double SAFETY = 0.9, FACMIN = 0.2, FACMAX = 10.0


cdef inline void rhs(int system, const double* y, double* dy, double kappa) noexcept nogil:
    cdef double lam, s, r2, f2, X2, w, u, c, t1, t2
    if system == AMBIENT:
        lam = 2.0 * (kappa - (y[4] * y[7] - y[5] * y[6])) / (
            y[0] * y[0] + y[1] * y[1] + y[2] * y[2] + y[3] * y[3])
        dy[0] = y[4]
        dy[1] = y[5]
        dy[2] = y[6]
        dy[3] = y[7]
        dy[4] = -kappa * y[0] + lam * y[3]
        dy[5] = -kappa * y[1] - lam * y[2]
        dy[6] = -kappa * y[2] - lam * y[1]
        dy[7] = -kappa * y[3] + lam * y[0]
    elif system == HAMSYS:
        s = y[0] * y[0] + y[1] * y[1]
        r2 = 2.0 + s
        f2 = 2.0 + 2.0 * s
        X2 = y[0] * y[4] - y[1] * y[3]
        w = X2 / f2
        u = r2 / f2
        c = (2.0 * (y[3] * y[3] + y[4] * y[4]) + 2.0 * X2 * X2) / (f2 * f2) \
            + y[5] * y[5] / (r2 * r2) - 2.0 * kappa
        dy[0] = u * y[3] - w * y[1]
        dy[1] = u * y[4] + w * y[0]
        dy[2] = y[5] / r2
        dy[3] = c * y[0] - w * y[4]
        dy[4] = c * y[1] + w * y[3]
        dy[5] = 0.0
    else:
        s = y[0] * y[0]
        t1 = 1.0 + s
        t2 = 2.0 + s
        c = y[3] * y[3] / (2.0 * t1 * t1) + y[5] * y[5] / (t2 * t2) - 2.0 * kappa
        if system == HAMSYS2:
            c += y[4] * y[4] / (s * s)
            dy[1] = y[4] / s
        else:
            dy[1] = 0.0
        dy[0] = t2 * y[3] / (2.0 * t1)
        dy[2] = y[5] / t2
        dy[3] = c * y[0]
        dy[4] = 0.0
        dy[5] = 0.0


cdef double initial_step(int system, int n, double t0, double* y0, double* f0,
                         double direction, double kappa, double rtol, double atol) noexcept nogil:
    cdef double sc, d0 = 0.0, d1 = 0.0, d2 = 0.0, h0, h1
    cdef double y1[NMAX]
    cdef double f1[NMAX]
    cdef int i
    for i in range(n):
        sc = atol + rtol * fabs(y0[i])
        d0 += (y0[i] / sc) * (y0[i] / sc)
        d1 += (f0[i] / sc) * (f0[i] / sc)
    d0 = sqrt(d0 / n)
    d1 = sqrt(d1 / n)
    if d0 < 1e-5 or d1 < 1e-5:
        h0 = 1e-6
    else:
        h0 = 0.01 * d0 / d1
    for i in range(n):
        y1[i] = y0[i] + direction * h0 * f0[i]
    rhs(system, y1, f1, kappa)
    for i in range(n):
        sc = atol + rtol * fabs(y0[i])
        d2 += ((f1[i] - f0[i]) / sc) * ((f1[i] - f0[i]) / sc)
    d2 = sqrt(d2 / n) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = h0 * 1e-3
        if h1 < 1e-6:
            h1 = 1e-6
    else:
        h1 = pow(0.01 / (d1 if d1 > d2 else d2), 0.2)
    return h1 if h1 < 100.0 * h0 else 100.0 * h0


def solve(int system, y0, double t0, double t1, double kappa, double rtol=1e-10,
          double atol=1e-12, double h0=0.0, long max_steps=1000000,
          double q_floor=0.0, bint renorm=False):
    cdef double[::1] y0v = np.ascontiguousarray(y0, dtype=float)
    cdef int n = y0v.shape[0]
    if n != (8 if system == AMBIENT else 6):
        raise ValueError("state length does not match the system")
    cdef double y[NMAX]
    cdef double ynew[NMAX]
    cdef double yt[NMAX]
    cdef double k1[NMAX]
    cdef double k2[NMAX]
    cdef double k3[NMAX]
    cdef double k4[NMAX]
    cdef double k5[NMAX]
    cdef double k6[NMAX]
    cdef double k7[NMAX]
    cdef double r2v
    cdef int i, status = 0
    cdef long steps = 0, nacc = 0, cap = 256
    cdef double t = t0, h, hs, err, sc, e, fac, min_h, d, rr
    cdef double direction = 1.0 if t1 >= t0 else -1.0
    cdef bint rejected = False
    cdef double* ts = <double*> malloc(cap * sizeof(double))
    cdef double* ys = <double*> malloc(cap * n * sizeof(double))
    cdef double* rc = <double*> malloc(cap * 5 * n * sizeof(double))
    cdef double* tmp
    if ts == NULL or ys == NULL or rc == NULL:
        free(ts); free(ys); free(rc)
        raise MemoryError()
    for i in range(n):
        y[i] = y0v[i]
        ys[i] = y[i]
    ts[0] = t

    with nogil:
        if t1 != t0:
            rhs(system, y, k1, kappa)
            if h0 > 0:
                h = h0
            else:
                h = initial_step(system, n, t, y, k1, direction, kappa, rtol, atol)
            while (t1 - t) * direction > 0.0:
                if steps >= max_steps:
                    status = 1
                    break
                min_h = 10.0 * fabs(nextafter(t, direction * INFINITY) - t)
                if h < min_h:
                    status = 3
                    break
                if (t + direction * h - t1) * direction > 0.0:
                    h = fabs(t1 - t)
                hs = direction * h
                for i in range(n):
                    yt[i] = y[i] + hs * (C_A21 * k1[i])
                rhs(system, yt, k2, kappa)
                for i in range(n):
                    yt[i] = y[i] + hs * (C_A31 * k1[i] + C_A32 * k2[i])
                rhs(system, yt, k3, kappa)
                for i in range(n):
                    yt[i] = y[i] + hs * (C_A41 * k1[i] + C_A42 * k2[i] + C_A43 * k3[i])
                rhs(system, yt, k4, kappa)
                for i in range(n):
                    yt[i] = y[i] + hs * (C_A51 * k1[i] + C_A52 * k2[i] + C_A53 * k3[i]
                                         + C_A54 * k4[i])
                rhs(system, yt, k5, kappa)
                for i in range(n):
                    yt[i] = y[i] + hs * (C_A61 * k1[i] + C_A62 * k2[i] + C_A63 * k3[i]
                                         + C_A64 * k4[i] + C_A65 * k5[i])
                rhs(system, yt, k6, kappa)
                for i in range(n):
                    ynew[i] = y[i] + hs * (C_A71 * k1[i] + C_A73 * k3[i] + C_A74 * k4[i]
                                           + C_A75 * k5[i] + C_A76 * k6[i])
                rhs(system, ynew, k7, kappa)
                steps += 1
                err = 0.0
                for i in range(n):
                    e = hs * (C_E1 * k1[i] + C_E3 * k3[i] + C_E4 * k4[i] + C_E5 * k5[i]
                              + C_E6 * k6[i] + C_E7 * k7[i])
                    sc = atol + rtol * (fabs(y[i]) if fabs(y[i]) > fabs(ynew[i]) else fabs(ynew[i]))
                    err += (e / sc) * (e / sc)
                err = sqrt(err / n)
                if err <= 1.0:
                    if err == 0.0:
                        fac = FACMAX
                    else:
                        fac = SAFETY * pow(err, -0.2)
                        if fac < FACMIN:
                            fac = FACMIN
                        if fac > FACMAX:
                            fac = FACMAX
                    if rejected and fac > 1.0:
                        fac = 1.0
                    rejected = False
                    if nacc + 2 > cap:
                        cap *= 2
                        tmp = <double*> realloc(ts, cap * sizeof(double))
                        if tmp == NULL:
                            status = 4
                            break
                        ts = tmp
                        tmp = <double*> realloc(ys, cap * n * sizeof(double))
                        if tmp == NULL:
                            status = 4
                            break
                        ys = tmp
                        tmp = <double*> realloc(rc, cap * 5 * n * sizeof(double))
                        if tmp == NULL:
                            status = 4
                            break
                        rc = tmp
                    for i in range(n):
                        r2v = ynew[i] - y[i]
                        rc[nacc * 5 * n + i] = y[i]
                        rc[nacc * 5 * n + n + i] = r2v
                        rc[nacc * 5 * n + 2 * n + i] = hs * k1[i] - r2v
                        rc[nacc * 5 * n + 3 * n + i] = r2v - hs * k7[i] - (hs * k1[i] - r2v)
                        rc[nacc * 5 * n + 4 * n + i] = hs * (C_D1 * k1[i] + C_D3 * k3[i]
                            + C_D4 * k4[i] + C_D5 * k5[i] + C_D6 * k6[i] + C_D7 * k7[i])
                    if h == fabs(t1 - t):
                        t = t1
                    else:
                        t = t + hs
                    for i in range(n):
                        y[i] = ynew[i]
                        k1[i] = k7[i]
                    if renorm and system == AMBIENT:
                        d = y[0] * y[3] - y[1] * y[2]
                        if d > 0.0:
                            rr = 1.0 / sqrt(d)
                            for i in range(4):
                                y[i] *= rr
                            rhs(system, y, k1, kappa)
                    nacc += 1
                    ts[nacc] = t
                    for i in range(n):
                        ys[nacc * n + i] = y[i]
                    if system == HAMSYS2 and y[0] <= q_floor:
                        status = 2
                        break
                    h *= fac
                else:
                    rejected = True
                    fac = SAFETY * pow(err, -0.2)
                    h *= (fac if fac > FACMIN else FACMIN)

    try:
        if status == 4:
            raise MemoryError()
        ts_out = np.array(<double[:nacc + 1]> ts, copy=True)
        ys_out = np.array(<double[:(nacc + 1) * n]> ys, copy=True).reshape(nacc + 1, n)
        if nacc > 0:
            rc_out = np.array(<double[:nacc * 5 * n]> rc, copy=True).reshape(nacc, 5, n)
        else:
            rc_out = np.zeros((0, 5, n))
    finally:
        free(ts)
        free(ys)
        free(rc)
    return ts_out, ys_out, rc_out, status


def eval_rhs(int system, y, double kappa):
    """The vector field at ``y`` as a list (for parity checks)."""
    cdef double yy[NMAX]
    cdef double dd[NMAX]
    cdef int i, n = len(y)
    if n != (8 if system == AMBIENT else 6):
        raise ValueError("state length does not match the system")
    for i in range(n):
        yy[i] = y[i]
    rhs(system, yy, dd, kappa)
    return [dd[i] for i in range(n)]
