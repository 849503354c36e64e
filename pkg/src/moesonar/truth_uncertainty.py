"""MOEs when ground truth is itself only known through a reference sensor.

With a system observation ``x'``, a more accurate reference observation
``y'`` and reference error density ``rho_lambda``, the MOE is
``integral f_s(e) rho_lambda(e - x' + y') de``: the system error is
``x' - y' + lambda`` with ``lambda`` drawn from the reference error model.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from moesonar.moe_core import GaussianCov, Moe, MoeError, UserFunction, cholesky_pd

DEFAULT_SAMPLES = 100_000


@dataclass(frozen=True)
class PairedObservation:
    x_prime: np.ndarray = field(compare=False)
    y_prime: np.ndarray = field(compare=False)

    def __post_init__(self) -> None:
        x = np.atleast_1d(np.asarray(self.x_prime, dtype=float))
        y = np.atleast_1d(np.asarray(self.y_prime, dtype=float))
        if x.shape != y.shape or x.ndim != 1:
            raise MoeError(f"paired observations differ in shape: {x.shape} vs {y.shape}")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise MoeError("paired observations must be finite")
        object.__setattr__(self, "x_prime", x)
        object.__setattr__(self, "y_prime", y)

    @property
    def difference(self) -> np.ndarray:
        return self.x_prime - self.y_prime


@dataclass(frozen=True)
class GaussianReference:
    """Zero-mean Gaussian reference error with covariance ``C_lambda``."""

    cov: np.ndarray = field(compare=False)

    def __post_init__(self) -> None:
        cov = np.atleast_2d(np.asarray(self.cov, dtype=float))
        cholesky_pd(cov, "C_lambda")
        object.__setattr__(self, "cov", cov)

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        chol = cholesky_pd(self.cov, "C_lambda")
        return rng.standard_normal((n, self.cov.shape[0])) @ chol.T


@dataclass(frozen=True)
class SampledReference:
    """Reference error given directly as draws of ``lambda`` (rows)."""

    draws: np.ndarray = field(compare=False)

    def __post_init__(self) -> None:
        d = np.asarray(self.draws, dtype=float)
        if d.ndim == 1:
            d = d.reshape(-1, 1)
        if d.ndim != 2 or d.shape[0] == 0:
            raise MoeError("SampledReference needs at least one draw")
        object.__setattr__(self, "draws", d)


ReferenceErrorModel = GaussianReference | SampledReference


def moe_uncertain_truth_gaussian(pair: PairedObservation, c_s, c_lambda) -> Moe:
    """Closed form for a Gaussian user function and Gaussian reference error.

    Evaluated as ``sqrt(det C_s / det(C_s + C_lambda)) *
    exp(-0.5 d^T (C_s + C_lambda)^{-1} d)`` with ``d = x' - y'``. This equals
    ``sqrt(det C / det C_lambda) exp(-0.5 d^T C_o^{-1} d)`` with
    ``C^{-1} = C_s^{-1} + C_lambda^{-1}`` and
    ``C_o^{-1} = C_lambda^{-1} - C_lambda^{-1} C C_lambda^{-1}`` (Woodbury),
    without inverting a nearly singular ``C_lambda``.
    """
    c_s = np.atleast_2d(np.asarray(c_s, dtype=float))
    c_l = np.atleast_2d(np.asarray(c_lambda, dtype=float))
    d = pair.difference
    n = d.size
    if c_s.shape != (n, n) or c_l.shape != (n, n):
        raise MoeError(f"covariances must be {n}x{n} to match the observations")
    ls = cholesky_pd(c_s, "C_s")
    cholesky_pd(c_l, "C_lambda")
    lt = cholesky_pd(c_s + c_l, "C_s + C_lambda")
    log_ratio = 2.0 * (np.sum(np.log(np.diag(ls))) - np.sum(np.log(np.diag(lt))))
    w = np.linalg.solve(lt, d)
    value = math.exp(0.5 * log_ratio - 0.5 * float(w @ w))
    return Moe(value, f"moe_uncertain_truth_gaussian(dim={n})")


def moe_uncertain_truth_literal(pair: PairedObservation, c_s, c_lambda) -> float:
    """The same closed form computed term by term with explicit inverses.

    Ill-conditioned when ``C_lambda`` is tiny; kept as a cross-check.
    """
    c_s = np.atleast_2d(np.asarray(c_s, dtype=float))
    c_l = np.atleast_2d(np.asarray(c_lambda, dtype=float))
    cl_inv = np.linalg.inv(c_l)
    c = np.linalg.inv(np.linalg.inv(c_s) + cl_inv)
    co_inv = cl_inv - cl_inv @ c @ cl_inv
    d = pair.difference
    return math.sqrt(np.linalg.det(c) / np.linalg.det(c_l)) * math.exp(-0.5 * float(d @ co_inv @ d))


def moe_uncertain_truth_sampled(uf: UserFunction, model: ReferenceErrorModel,
                                pair: PairedObservation, k: int = DEFAULT_SAMPLES,
                                seed: int | None = 0) -> Moe:
    """Monte Carlo mean of ``f_s(x' - y' + lambda)``.

    Gaussian models draw ``k`` samples from ``numpy.random.default_rng(seed)``;
    sampled models use their stored draws and ignore ``k`` and ``seed``. The
    returned :class:`Moe` carries the standard error of the mean.
    """
    d = pair.difference
    if isinstance(model, GaussianReference):
        if k < 1:
            raise MoeError("sample count must be >= 1")
        if model.cov.shape != (d.size, d.size):
            raise MoeError("reference covariance does not match the observation dimension")
        lam = model.draw(np.random.default_rng(seed), int(k))
    elif isinstance(model, SampledReference):
        lam = model.draws
        if lam.shape[1] != d.size:
            raise MoeError("reference draws do not match the observation dimension")
    else:
        raise MoeError(f"unknown reference error model {type(model).__name__}")
    eps = d[None, :] + lam
    if isinstance(uf, GaussianCov) or eps.shape[1] > 1:
        vals = uf.evaluate_many(eps)
    else:
        vals = uf.evaluate_many(eps[:, 0])
    n = vals.size
    se = float(np.std(vals, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return Moe(float(np.mean(vals)), f"moe_uncertain_truth_sampled(K={n})", stderr=se)
