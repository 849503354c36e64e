"""Pure-Python implementations of the numerical hot loops.

These mirror ``_kernels_cy.pyx`` routine for routine; :mod:`moesonar.kernels`
picks whichever is available at import time.
"""
from __future__ import annotations

import math

import numpy as np

GAUSS_EXP = 0
RATIONAL_HALF = 1
UNIFORM_WINDOW = 2
TABULATED = 3

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
_MAX_DEPTH = 60


class QuadratureBudgetError(RuntimeError):
    """Adaptive quadrature hit its subdivision budget before converging."""


def _user_value(kind, p0, p1, kx, kf, x):
    if kind == GAUSS_EXP:
        return math.exp(-0.5 * (x / p0) ** 2)
    if kind == RATIONAL_HALF:
        a2 = p0 * p0
        return a2 / (a2 + x * x)
    if kind == UNIFORM_WINDOW:
        return 1.0 if p0 <= x <= p1 else 0.0
    if kind == TABULATED:
        n = len(kx)
        if x <= kx[0]:
            return kf[0]
        if x >= kx[n - 1]:
            return kf[n - 1]
        lo, hi = 0, n - 1
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if kx[mid] <= x:
                lo = mid
            else:
                hi = mid
        w = (x - kx[lo]) / (kx[hi] - kx[lo])
        return kf[lo] + w * (kf[hi] - kf[lo])
    raise ValueError(f"unknown user-function kind {kind}")


def _simpson(f, a, b, tol, budget):
    """Iterative adaptive Simpson on [a, b]; returns (integral, intervals used)."""
    fa, fb = f(a), f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    stack = [(a, b, fa, fm, fb, whole, tol, 0)]
    total = 0.0
    used = 1
    while stack:
        a, b, fa, fm, fb, whole, tol, depth = stack.pop()
        m = 0.5 * (a + b)
        lm = 0.5 * (a + m)
        rm = 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
        right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
        delta = left + right - whole
        if depth >= _MAX_DEPTH or abs(delta) <= 15.0 * tol:
            total += left + right + delta / 15.0
            continue
        used += 2
        if used > budget:
            raise QuadratureBudgetError(
                f"adaptive Simpson exceeded {budget} intervals"
            )
        stack.append((m, b, fm, frm, fb, right, 0.5 * tol, depth + 1))
        stack.append((a, m, fa, flm, fm, left, 0.5 * tol, depth + 1))
    return total, used


def simpson_gauss(kind, params, kx, kf, mean, sigma, a, b, tol, budget):
    """Integrate user_function(x) * N(x; mean, sigma) over [a, b]."""
    p0 = float(params[0])
    p1 = float(params[1])
    kx = [float(v) for v in kx]
    kf = [float(v) for v in kf]
    inv_s = 1.0 / sigma
    norm = _INV_SQRT_2PI * inv_s

    def f(x):
        z = (x - mean) * inv_s
        return _user_value(kind, p0, p1, kx, kf, x) * norm * math.exp(-0.5 * z * z)

    return _simpson(f, float(a), float(b), float(tol), int(budget))


def simpson_callable(func, a, b, tol, budget):
    """Integrate an arbitrary scalar callable over [a, b]."""
    return _simpson(lambda x: float(func(x)), float(a), float(b), float(tol), int(budget))


def kalman_cv(times, z, r, q, vel_var):
    """Constant-velocity Kalman filter over 2-D position measurements.

    ``r`` holds measurement covariances as rows (cxx, cxy, cyy). Returns the
    filtered states (n, 4), covariances (n, 4, 4) and the normalised
    innovation squared per update (NaN for the initialising measurement).
    """
    times = np.asarray(times, dtype=float)
    z = np.asarray(z, dtype=float)
    r = np.asarray(r, dtype=float)
    n = times.shape[0]
    states = np.empty((n, 4))
    covs = np.empty((n, 4, 4))
    nis = np.full(n, np.nan)
    if n == 0:
        return states, covs, nis
    H = np.zeros((2, 4))
    H[0, 0] = H[1, 1] = 1.0
    x = np.array([z[0, 0], z[0, 1], 0.0, 0.0])
    P = np.zeros((4, 4))
    P[0, 0], P[0, 1], P[1, 0], P[1, 1] = r[0, 0], r[0, 1], r[0, 1], r[0, 2]
    P[2, 2] = P[3, 3] = vel_var
    states[0] = x
    covs[0] = P
    eye = np.eye(4)
    for k in range(1, n):
        dt = times[k] - times[k - 1]
        F = np.eye(4)
        F[0, 2] = F[1, 3] = dt
        Q = np.zeros((4, 4))
        q11, q12, q22 = q * dt ** 3 / 3.0, q * dt ** 2 / 2.0, q * dt
        Q[0, 0] = Q[1, 1] = q11
        Q[0, 2] = Q[2, 0] = Q[1, 3] = Q[3, 1] = q12
        Q[2, 2] = Q[3, 3] = q22
        x = F @ x
        P = F @ P @ F.T + Q
        R = np.array([[r[k, 0], r[k, 1]], [r[k, 1], r[k, 2]]])
        nu = z[k] - H @ x
        S = H @ P @ H.T + R
        det = S[0, 0] * S[1, 1] - S[0, 1] * S[1, 0]
        S_inv = np.array([[S[1, 1], -S[0, 1]], [-S[1, 0], S[0, 0]]]) / det
        K = P @ H.T @ S_inv
        x = x + K @ nu
        A = eye - K @ H
        P = A @ P @ A.T + K @ R @ K.T
        P = 0.5 * (P + P.T)
        nis[k] = float(nu @ S_inv @ nu)
        states[k] = x
        covs[k] = P
    return states, covs, nis
