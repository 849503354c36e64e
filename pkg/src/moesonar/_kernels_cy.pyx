# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot loops in ``_kernels_py``; same signatures."""
from libc.math cimport exp, fabs, sqrt, M_PI, NAN

import numpy as np
cimport numpy as cnp

from moesonar._kernels_py import QuadratureBudgetError

cnp.import_array()

DEF MAX_DEPTH = 60
DEF STACK = 128

cdef int GAUSS_EXP = 0
cdef int RATIONAL_HALF = 1
cdef int UNIFORM_WINDOW = 2
cdef int TABULATED = 3


cdef inline double _user_value(int kind, double p0, double p1,
                               double[::1] kx, double[::1] kf, double x) noexcept nogil:
    cdef Py_ssize_t n, lo, hi, mid
    cdef double w
    if kind == GAUSS_EXP:
        return exp(-0.5 * (x / p0) * (x / p0))
    if kind == RATIONAL_HALF:
        return p0 * p0 / (p0 * p0 + x * x)
    if kind == UNIFORM_WINDOW:
        return 1.0 if (p0 <= x and x <= p1) else 0.0
    n = kx.shape[0]
    if x <= kx[0]:
        return kf[0]
    if x >= kx[n - 1]:
        return kf[n - 1]
    lo = 0
    hi = n - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if kx[mid] <= x:
            lo = mid
        else:
            hi = mid
    w = (x - kx[lo]) / (kx[hi] - kx[lo])
    return kf[lo] + w * (kf[hi] - kf[lo])


cdef struct GaussCtx:
    int kind
    double p0, p1, mean, inv_s, norm


cdef inline double _gauss_integrand(GaussCtx* c, double[::1] kx, double[::1] kf,
                                    double x) noexcept nogil:
    cdef double z = (x - c.mean) * c.inv_s
    return _user_value(c.kind, c.p0, c.p1, kx, kf, x) * c.norm * exp(-0.5 * z * z)


def simpson_gauss(int kind, params, kx, kf, double mean, double sigma,
                  double a, double b, double tol, long budget):
    cdef double[::1] kxv = np.ascontiguousarray(kx, dtype=np.float64) if len(kx) else np.zeros(1)
    cdef double[::1] kfv = np.ascontiguousarray(kf, dtype=np.float64) if len(kf) else np.zeros(1)
    cdef GaussCtx c
    c.kind = kind
    c.p0 = float(params[0])
    c.p1 = float(params[1])
    c.mean = mean
    c.inv_s = 1.0 / sigma
    c.norm = c.inv_s / sqrt(2.0 * M_PI)

    cdef double sa[STACK]
    cdef double sb[STACK]
    cdef double sfa[STACK]
    cdef double sfm[STACK]
    cdef double sfb[STACK]
    cdef double swhole[STACK]
    cdef double stol[STACK]
    cdef int sdepth[STACK]
    cdef int top = 0
    cdef long used = 1
    cdef double total = 0.0
    cdef double fa, fm, fb, whole, m, lm, rm, flm, frm, left, right, delta, t
    cdef int depth
    cdef bint over = False

    with nogil:
        fa = _gauss_integrand(&c, kxv, kfv, a)
        fb = _gauss_integrand(&c, kxv, kfv, b)
        m = 0.5 * (a + b)
        fm = _gauss_integrand(&c, kxv, kfv, m)
        sa[0] = a; sb[0] = b; sfa[0] = fa; sfm[0] = fm; sfb[0] = fb
        swhole[0] = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
        stol[0] = tol; sdepth[0] = 0
        top = 1
        while top > 0:
            top -= 1
            a = sa[top]; b = sb[top]; fa = sfa[top]; fm = sfm[top]; fb = sfb[top]
            whole = swhole[top]; t = stol[top]; depth = sdepth[top]
            m = 0.5 * (a + b)
            lm = 0.5 * (a + m)
            rm = 0.5 * (m + b)
            flm = _gauss_integrand(&c, kxv, kfv, lm)
            frm = _gauss_integrand(&c, kxv, kfv, rm)
            left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
            right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
            delta = left + right - whole
            if depth >= MAX_DEPTH or fabs(delta) <= 15.0 * t:
                total += left + right + delta / 15.0
                continue
            used += 2
            if used > budget:
                over = True
                break
            sa[top] = m; sb[top] = b; sfa[top] = fm; sfm[top] = frm; sfb[top] = fb
            swhole[top] = right; stol[top] = 0.5 * t; sdepth[top] = depth + 1
            top += 1
            sa[top] = a; sb[top] = m; sfa[top] = fa; sfm[top] = flm; sfb[top] = fm
            swhole[top] = left; stol[top] = 0.5 * t; sdepth[top] = depth + 1
            top += 1
    if over:
        raise QuadratureBudgetError(f"adaptive Simpson exceeded {budget} intervals")
    return total, used


def simpson_callable(func, double a, double b, double tol, long budget):
    cdef list stack
    cdef double fa, fb, fm, whole, m, lm, rm, flm, frm, left, right, delta, t
    cdef double total = 0.0
    cdef long used = 1
    cdef int depth
    fa = float(func(a))
    fb = float(func(b))
    m = 0.5 * (a + b)
    fm = float(func(m))
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    stack = [(a, b, fa, fm, fb, whole, tol, 0)]
    while stack:
        a, b, fa, fm, fb, whole, t, depth = stack.pop()
        m = 0.5 * (a + b)
        lm = 0.5 * (a + m)
        rm = 0.5 * (m + b)
        flm = float(func(lm))
        frm = float(func(rm))
        left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
        right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
        delta = left + right - whole
        if depth >= MAX_DEPTH or fabs(delta) <= 15.0 * t:
            total += left + right + delta / 15.0
            continue
        used += 2
        if used > budget:
            raise QuadratureBudgetError(f"adaptive Simpson exceeded {budget} intervals")
        stack.append((m, b, fm, frm, fb, right, 0.5 * t, depth + 1))
        stack.append((a, m, fa, flm, fm, left, 0.5 * t, depth + 1))
    return total, used


def kalman_cv(times, z, r, double q, double vel_var):
    cdef double[::1] tv = np.ascontiguousarray(times, dtype=np.float64)
    cdef double[:, ::1] zv = np.ascontiguousarray(z, dtype=np.float64).reshape(-1, 2)
    cdef double[:, ::1] rv = np.ascontiguousarray(r, dtype=np.float64).reshape(-1, 3)
    cdef Py_ssize_t n = tv.shape[0]
    states_arr = np.empty((n, 4))
    covs_arr = np.empty((n, 4, 4))
    nis_arr = np.full(n, np.nan)
    if n == 0:
        return states_arr, covs_arr, nis_arr
    cdef double[:, ::1] states = states_arr
    cdef double[:, :, ::1] covs = covs_arr
    cdef double[::1] nis = nis_arr

    cdef double x[4]
    cdef double P[4][4]
    cdef double Pp[4][4]
    cdef double K[4][2]
    cdef double A[4][4]
    cdef double T[4][4]
    cdef double dt, q11, q12, q22, s00, s01, s11, det, i00, i01, i11
    cdef double nu0, nu1, r00, r01, r11, acc
    cdef Py_ssize_t k, i, j, l

    with nogil:
        x[0] = zv[0, 0]; x[1] = zv[0, 1]; x[2] = 0.0; x[3] = 0.0
        for i in range(4):
            for j in range(4):
                P[i][j] = 0.0
        P[0][0] = rv[0, 0]; P[0][1] = rv[0, 1]; P[1][0] = rv[0, 1]; P[1][1] = rv[0, 2]
        P[2][2] = vel_var; P[3][3] = vel_var
        for i in range(4):
            states[0, i] = x[i]
            for j in range(4):
                covs[0, i, j] = P[i][j]
        for k in range(1, n):
            dt = tv[k] - tv[k - 1]
            q11 = q * dt * dt * dt / 3.0
            q12 = q * dt * dt / 2.0
            q22 = q * dt
            # predict: x <- F x ; P <- F P F' + Q with F = [[I, dt I], [0, I]]
            x[0] = x[0] + dt * x[2]
            x[1] = x[1] + dt * x[3]
            for i in range(4):
                for j in range(4):
                    T[i][j] = P[i][j]
            for j in range(4):
                T[0][j] = P[0][j] + dt * P[2][j]
                T[1][j] = P[1][j] + dt * P[3][j]
            for i in range(4):
                Pp[i][0] = T[i][0] + dt * T[i][2]
                Pp[i][1] = T[i][1] + dt * T[i][3]
                Pp[i][2] = T[i][2]
                Pp[i][3] = T[i][3]
            Pp[0][0] += q11; Pp[1][1] += q11
            Pp[0][2] += q12; Pp[2][0] += q12; Pp[1][3] += q12; Pp[3][1] += q12
            Pp[2][2] += q22; Pp[3][3] += q22
            r00 = rv[k, 0]; r01 = rv[k, 1]; r11 = rv[k, 2]
            nu0 = zv[k, 0] - x[0]
            nu1 = zv[k, 1] - x[1]
            s00 = Pp[0][0] + r00
            s01 = 0.5 * (Pp[0][1] + Pp[1][0]) + r01
            s11 = Pp[1][1] + r11
            det = s00 * s11 - s01 * s01
            i00 = s11 / det
            i01 = -s01 / det
            i11 = s00 / det
            for i in range(4):
                K[i][0] = Pp[i][0] * i00 + Pp[i][1] * i01
                K[i][1] = Pp[i][0] * i01 + Pp[i][1] * i11
            for i in range(4):
                x[i] = x[i] + K[i][0] * nu0 + K[i][1] * nu1
            # Joseph form: P = A Pp A' + K R K', A = I - K H
            for i in range(4):
                for j in range(4):
                    A[i][j] = 1.0 if i == j else 0.0
                A[i][0] -= K[i][0]
                A[i][1] -= K[i][1]
            for i in range(4):
                for j in range(4):
                    acc = 0.0
                    for l in range(4):
                        acc = acc + A[i][l] * Pp[l][j]
                    T[i][j] = acc
            for i in range(4):
                for j in range(4):
                    acc = 0.0
                    for l in range(4):
                        acc = acc + T[i][l] * A[j][l]
                    acc = acc + (K[i][0] * (r00 * K[j][0] + r01 * K[j][1])
                                 + K[i][1] * (r01 * K[j][0] + r11 * K[j][1]))
                    P[i][j] = acc
            for i in range(4):
                for j in range(i + 1, 4):
                    acc = 0.5 * (P[i][j] + P[j][i])
                    P[i][j] = acc
                    P[j][i] = acc
            nis[k] = nu0 * (i00 * nu0 + i01 * nu1) + nu1 * (i01 * nu0 + i11 * nu1)
            for i in range(4):
                states[k, i] = x[i]
                for j in range(4):
                    covs[k, i, j] = P[i][j]
    return states_arr, covs_arr, nis_arr
