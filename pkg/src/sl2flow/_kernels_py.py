"""Pure-Python Dormand-Prince 5(4) kernel.

This mirrors the compiled ``_kernels`` extension line for line and is used
when the extension is unavailable (or when ``SL2FLOW_PURE=1``).  Both expose
``solve(system, y0, t0, t1, kappa, rtol, atol, h0, max_steps, q_floor,
renorm)`` returning ``(ts, ys, rcont, status)`` as numpy arrays.
"""
import math

import numpy as np

AMBIENT, HAMSYS, HAMSYS2, HAMSYS3 = 0, 1, 2, 3
DIMS = (8, 6, 6, 6)

OK, MAX_STEPS, FLOOR_HIT, STEP_UNDERFLOW = 0, 1, 2, 3

# Dormand-Prince tableau
C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
A71, A73, A74, A75, A76 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
E1, E3, E4, E5, E6, E7 = (71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200,
                          22 / 525, -1 / 40)
# Hairer's dense output coefficients
D1, D3, D4, D5, D6, D7 = (-12715105075 / 11282082432, 87487479700 / 32700410799,
                          -10690763975 / 1880347072, 701980252875 / 199316789632,
                          -1453857185 / 822651844, 69997945 / 29380423)

SAFETY, FACMIN, FACMAX = 0.9, 0.2, 10.0


def rhs(system, y, kappa):
    if system == AMBIENT:
        a0, a1, a2, a3, b0, b1, b2, b3 = y
        lam = 2.0 * (kappa - (b0 * b3 - b1 * b2)) / (a0 * a0 + a1 * a1 + a2 * a2 + a3 * a3)
        return [b0, b1, b2, b3,
                -kappa * a0 + lam * a3, -kappa * a1 - lam * a2,
                -kappa * a2 - lam * a1, -kappa * a3 + lam * a0]
    if system == HAMSYS:
        x1, x2, x3, p1, p2, p3 = y
        s = x1 * x1 + x2 * x2
        r2 = 2.0 + s
        f2 = 2.0 + 2.0 * s
        X2 = x1 * p2 - x2 * p1
        w = X2 / f2
        u = r2 / f2
        c = (2.0 * (p1 * p1 + p2 * p2) + 2.0 * X2 * X2) / (f2 * f2) + p3 * p3 / (r2 * r2) - 2.0 * kappa
        return [u * p1 - w * x2, u * p2 + w * x1, p3 / r2,
                c * x1 - w * p2, c * x2 + w * p1, 0.0]
    q1, q2, q3, e1, e2, e3 = y
    s = q1 * q1
    t1 = 1.0 + s
    t2 = 2.0 + s
    c = e1 * e1 / (2.0 * t1 * t1) + e3 * e3 / (t2 * t2) - 2.0 * kappa
    if system == HAMSYS2:
        c += e2 * e2 / (s * s)
        dq2 = e2 / s
    else:
        dq2 = 0.0
    return [t2 * e1 / (2.0 * t1), dq2, e3 / t2, c * q1, 0.0, 0.0]


def _error_norm(err, y, ynew, rtol, atol):
    acc = 0.0
    for e, a, b in zip(err, y, ynew):
        sc = atol + rtol * max(abs(a), abs(b))
        r = e / sc
        acc += r * r  # not ** 2: libm pow is not always correctly rounded
    return math.sqrt(acc / len(err))


def initial_step(system, t0, y0, f0, direction, kappa, rtol, atol):
    # plain loops: sum() is compensated on newer Pythons and would break parity
    n = len(y0)
    sc = [atol + rtol * abs(v) for v in y0]
    d0 = d1 = 0.0
    for v, f, s in zip(y0, f0, sc):
        d0 += (v / s) * (v / s)
        d1 += (f / s) * (f / s)
    d0 = math.sqrt(d0 / n)
    d1 = math.sqrt(d1 / n)
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    y1 = [v + direction * h0 * f for v, f in zip(y0, f0)]
    f1 = rhs(system, y1, kappa)
    d2 = 0.0
    for a, b, s in zip(f1, f0, sc):
        d2 += ((a - b) / s) * ((a - b) / s)
    d2 = math.sqrt(d2 / n) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100.0 * h0, h1)


def _renormalize(y):
    d = y[0] * y[3] - y[1] * y[2]
    if d > 0.0:
        r = 1.0 / math.sqrt(d)
        for i in range(4):
            y[i] *= r


def solve(system, y0, t0, t1, kappa, rtol=1e-10, atol=1e-12, h0=0.0,
          max_steps=1_000_000, q_floor=0.0, renorm=False):
    y = [float(v) for v in y0]
    n = len(y)
    t = float(t0)
    direction = 1.0 if t1 >= t0 else -1.0
    ts = [t]
    ys = [list(y)]
    rc = []
    status = OK
    if t1 == t0:
        return _pack(ts, ys, rc, n, status)
    k1 = rhs(system, y, kappa)
    h = abs(h0) if h0 > 0 else initial_step(system, t, y, k1, direction, kappa, rtol, atol)
    rejected = False
    steps = 0
    while (t1 - t) * direction > 0.0:
        if steps >= max_steps:
            status = MAX_STEPS
            break
        min_h = 10.0 * abs(math.nextafter(t, direction * math.inf) - t)
        if h < min_h:
            status = STEP_UNDERFLOW
            break
        if (t + direction * h - t1) * direction > 0.0:
            h = abs(t1 - t)
        hs = direction * h
        y2 = [a + hs * (A21 * b1) for a, b1 in zip(y, k1)]
        k2 = rhs(system, y2, kappa)
        y3 = [a + hs * (A31 * b1 + A32 * b2) for a, b1, b2 in zip(y, k1, k2)]
        k3 = rhs(system, y3, kappa)
        y4 = [a + hs * (A41 * b1 + A42 * b2 + A43 * b3) for a, b1, b2, b3 in zip(y, k1, k2, k3)]
        k4 = rhs(system, y4, kappa)
        y5 = [a + hs * (A51 * b1 + A52 * b2 + A53 * b3 + A54 * b4)
              for a, b1, b2, b3, b4 in zip(y, k1, k2, k3, k4)]
        k5 = rhs(system, y5, kappa)
        y6 = [a + hs * (A61 * b1 + A62 * b2 + A63 * b3 + A64 * b4 + A65 * b5)
              for a, b1, b2, b3, b4, b5 in zip(y, k1, k2, k3, k4, k5)]
        k6 = rhs(system, y6, kappa)
        ynew = [a + hs * (A71 * b1 + A73 * b3 + A74 * b4 + A75 * b5 + A76 * b6)
                for a, b1, b3, b4, b5, b6 in zip(y, k1, k3, k4, k5, k6)]
        k7 = rhs(system, ynew, kappa)
        steps += 1
        errv = [hs * (E1 * b1 + E3 * b3 + E4 * b4 + E5 * b5 + E6 * b6 + E7 * b7)
                for b1, b3, b4, b5, b6, b7 in zip(k1, k3, k4, k5, k6, k7)]
        err = _error_norm(errv, y, ynew, rtol, atol)
        if err <= 1.0:
            fac = FACMAX if err == 0.0 else min(FACMAX, max(FACMIN, SAFETY * err ** -0.2))
            if rejected:
                fac = min(1.0, fac)
            rejected = False
            r1 = y
            r2 = [b - a for a, b in zip(y, ynew)]
            r3 = [hs * b1 - d for b1, d in zip(k1, r2)]
            r4 = [d - hs * b7 - e for d, b7, e in zip(r2, k7, r3)]
            r5 = [hs * (D1 * b1 + D3 * b3 + D4 * b4 + D5 * b5 + D6 * b6 + D7 * b7)
                  for b1, b3, b4, b5, b6, b7 in zip(k1, k3, k4, k5, k6, k7)]
            rc.append([list(r1), r2, r3, r4, r5])
            t = t1 if h == abs(t1 - t) else t + hs
            y = ynew
            k1 = k7
            if renorm and system == AMBIENT:
                _renormalize(y)
                k1 = rhs(system, y, kappa)
            ts.append(t)
            ys.append(list(y))
            if system == HAMSYS2 and y[0] <= q_floor:
                status = FLOOR_HIT
                break
            h *= fac
        else:
            rejected = True
            h *= max(FACMIN, SAFETY * err ** -0.2)
    return _pack(ts, ys, rc, n, status)


def _pack(ts, ys, rc, n, status):
    rcont = np.array(rc, dtype=float).reshape(len(rc), 5, n)
    return np.array(ts), np.array(ys, dtype=float).reshape(len(ys), n), rcont, status


def eval_rhs(system, y, kappa):
    """The vector field at ``y`` as a list (for parity checks)."""
    return rhs(system, [float(v) for v in y], kappa)
