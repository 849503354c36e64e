"""User functions, observation distributions and single-user MOE computations.

A measure of effectiveness (MOE) is the fraction of observations that a user
finds acceptable, weighted by a *user function* ``f_s`` with values in
``[0, 1]``. For an observation density ``rho_o`` it is the overlap integral
``M = integral f_s(x) rho_o(x) dx``; the helpers below cover the set,
point-sample, sample-set, discrete, closed-form Gaussian and quadrature cases,
plus the product / geometric-mean combination of several MOEs.

Every type is immutable and every function is pure.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Hashable, Iterable, Sequence

import numpy as np
from scipy.linalg import solve_triangular

from moesonar import kernels

DEFAULT_ABS_TOL = 1e-8
DEFAULT_BUDGET = 1_000_000
GAUSS_HALF_WIDTH = 10.0  # integration range in standard deviations
MAX_GRID_DIM = 3
_RANGE_SLACK = 1e-7


class MoeError(ValueError):
    """Invalid input to an MOE computation."""


class UnsupportedDistribution(MoeError):
    """The distribution variant or dimension cannot be integrated here."""


QuadratureError = kernels.QuadratureBudgetError


def _check_positive(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value) or value <= 0.0:
        raise MoeError(f"{name} must be positive and finite, got {value!r}")
    return value


# ---------------------------------------------------------------------------
# MOE value
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Moe:
    """An MOE value in ``[0, 1]`` with a free-text provenance note.

    ``stderr`` is set only by Monte Carlo estimators.
    """

    value: float
    provenance: str = ""
    stderr: float | None = None

    def __post_init__(self) -> None:
        v = float(self.value)
        if not math.isfinite(v) or v < -_RANGE_SLACK or v > 1.0 + _RANGE_SLACK:
            raise MoeError(f"MOE value {v!r} outside [0, 1]")
        object.__setattr__(self, "value", min(1.0, max(0.0, v)))

    def __float__(self) -> float:
        return self.value


def _value(m: Moe | float) -> float:
    return m.value if isinstance(m, Moe) else float(m)


# ---------------------------------------------------------------------------
# User functions
# ---------------------------------------------------------------------------


class UserFunction:
    """Base class: an acceptance function with values in ``[0, 1]``.

    Scalar variants score a real number. Given a vector argument they score
    its single component when the vector has length one, and its Euclidean
    norm otherwise (errors in position, for instance).
    """

    def _scalar_many(self, x: np.ndarray) -> np.ndarray:  # pragma: no cover
        raise NotImplementedError

    def breakpoints(self) -> tuple[float, ...]:
        """Abscissae where the function is non-smooth or changes scale."""
        return ()

    def evaluate_many(self, xs: Any) -> np.ndarray:
        """Vectorised evaluation over the leading axis of ``xs``."""
        xs = np.asarray(xs, dtype=float)
        if xs.ndim == 2:
            xs = xs[:, 0] if xs.shape[1] == 1 else np.linalg.norm(xs, axis=1)
        elif xs.ndim != 1:
            raise MoeError(f"expected 1-D or 2-D sample array, got shape {xs.shape}")
        return self._scalar_many(xs)

    def __call__(self, x: Any) -> float:
        arr = np.asarray(x, dtype=float)
        if arr.ndim == 0:
            return float(self._scalar_many(arr.reshape(1))[0])
        if arr.ndim == 1:
            return float(self.evaluate_many(arr.reshape(1, -1))[0])
        raise MoeError(f"cannot score an argument of shape {arr.shape}")


@dataclass(frozen=True)
class GaussianExp(UserFunction):
    """``exp(-x^2 / (2 sigma_s^2))``; 0.6065 at ``x = sigma_s``."""

    sigma_s: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "sigma_s", _check_positive("sigma_s", self.sigma_s))

    def _scalar_many(self, x):
        return np.exp(-0.5 * (x / self.sigma_s) ** 2)

    def breakpoints(self):
        s = self.sigma_s
        return (-10 * s, -3 * s, -s, 0.0, s, 3 * s, 10 * s)


@dataclass(frozen=True)
class RationalHalf(UserFunction):
    """``a^2 / (a^2 + x^2)``; exactly one half at ``x = a``."""

    a: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "a", _check_positive("a", self.a))

    def _scalar_many(self, x):
        a2 = self.a * self.a
        return a2 / (a2 + x * x)

    def breakpoints(self):
        a = self.a
        return (-10 * a, -3 * a, -a, 0.0, a, 3 * a, 10 * a)


@dataclass(frozen=True)
class UniformWindow(UserFunction):
    """Hard acceptance window: 1 on ``[lower, upper]``, 0 elsewhere."""

    lower: float
    upper: float

    def __post_init__(self) -> None:
        lo, hi = float(self.lower), float(self.upper)
        if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
            raise MoeError(f"UniformWindow needs finite lower < upper, got {lo}, {hi}")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    def _scalar_many(self, x):
        return ((x >= self.lower) & (x <= self.upper)).astype(float)

    def breakpoints(self):
        return (self.lower, self.upper)


@dataclass(frozen=True)
class Tabulated(UserFunction):
    """Look-up table of ``(x_i, f_i)`` knots.

    Linear interpolation between knots, clamped to the end values outside.
    """

    knots: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        knots = tuple((float(x), float(f)) for x, f in self.knots)
        if len(knots) < 1:
            raise MoeError("Tabulated user function needs at least one knot")
        xs = [k[0] for k in knots]
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise MoeError("Tabulated knots must be strictly increasing in x")
        if any(not (0.0 <= k[1] <= 1.0) for k in knots):
            raise MoeError("Tabulated values must lie in [0, 1]")
        object.__setattr__(self, "knots", knots)

    @property
    def xs(self) -> np.ndarray:
        return np.array([k[0] for k in self.knots])

    @property
    def fs(self) -> np.ndarray:
        return np.array([k[1] for k in self.knots])

    def _scalar_many(self, x):
        return np.interp(x, self.xs, self.fs)

    def breakpoints(self):
        return tuple(self.xs)


@dataclass(frozen=True)
class GaussianCov(UserFunction):
    """Vector Gaussian acceptance ``exp(-0.5 e^T C_s^{-1} e)``."""

    cov: np.ndarray = field(compare=False)

    def __post_init__(self) -> None:
        cov = np.atleast_2d(np.asarray(self.cov, dtype=float))
        chol = cholesky_pd(cov, "C_s")
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "_chol", chol)

    @property
    def dim(self) -> int:
        return self.cov.shape[0]

    def evaluate_many(self, xs):
        xs = np.asarray(xs, dtype=float)
        if xs.ndim == 1:
            xs = xs.reshape(-1, 1) if self.dim == 1 else xs.reshape(1, -1)
        if xs.shape[1] != self.dim:
            raise MoeError(f"expected {self.dim}-vectors, got shape {xs.shape}")
        w = solve_triangular(self._chol, xs.T, lower=True)
        return np.exp(-0.5 * np.sum(w * w, axis=0))

    def _scalar_many(self, x):
        return self.evaluate_many(np.asarray(x).reshape(-1, 1))

    def __call__(self, x):
        return float(self.evaluate_many(np.atleast_1d(np.asarray(x, dtype=float)).reshape(1, -1))[0])


@dataclass(frozen=True)
class DiscreteVector(UserFunction):
    """Acceptance level per class label.

    Vectors whose maximum is below one are kept as given; use
    :func:`user_function_from_acceptance_probs` to normalise.
    """

    labels: tuple[Hashable, ...]
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        labels = tuple(self.labels)
        values = tuple(float(v) for v in self.values)
        if len(labels) != len(values) or not labels:
            raise MoeError("DiscreteVector needs one value per label")
        if len(set(labels)) != len(labels):
            raise MoeError("DiscreteVector labels must be unique")
        if any(not (0.0 <= v <= 1.0) for v in values):
            raise MoeError("DiscreteVector values must lie in [0, 1]")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "values", values)

    def __call__(self, label):
        try:
            return self.values[self.labels.index(label)]
        except ValueError:
            raise MoeError(f"unknown label {label!r}; known {self.labels}") from None

    def evaluate_many(self, xs):
        return np.array([self(x) for x in xs])


def eval_user_function(uf: UserFunction, x: Any) -> float:
    """Acceptance level of ``x`` under ``uf``."""
    return uf(x)


# ---------------------------------------------------------------------------
# Observation distributions
# ---------------------------------------------------------------------------


class ObservationDistribution:
    """Base class for observation densities."""

    provenance: str = ""


@dataclass(frozen=True)
class PointSample(ObservationDistribution):
    x: Any
    provenance: str = ""


@dataclass(frozen=True)
class SampleSet(ObservationDistribution):
    samples: np.ndarray = field(compare=False)
    provenance: str = ""

    def __post_init__(self) -> None:
        arr = np.asarray(self.samples, dtype=float)
        if arr.ndim not in (1, 2):
            raise MoeError("SampleSet takes a list of scalars or of equal-length vectors")
        if arr.shape[0] == 0:
            raise MoeError("SampleSet is empty")
        object.__setattr__(self, "samples", arr)


@dataclass(frozen=True)
class DiscreteProb(ObservationDistribution):
    labels: tuple[Hashable, ...]
    probs: tuple[float, ...]
    provenance: str = ""

    def __post_init__(self) -> None:
        labels = tuple(self.labels)
        probs = tuple(float(p) for p in self.probs)
        if len(labels) != len(probs) or not labels:
            raise MoeError("DiscreteProb needs one probability per label")
        if len(set(labels)) != len(labels):
            raise MoeError("DiscreteProb labels must be unique")
        if any(p < 0.0 or not math.isfinite(p) for p in probs):
            raise MoeError("DiscreteProb probabilities must be non-negative")
        if abs(math.fsum(probs) - 1.0) > 1e-9:
            raise MoeError(f"DiscreteProb probabilities sum to {math.fsum(probs)}, not 1")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "probs", probs)


@dataclass(frozen=True)
class Gaussian1D(ObservationDistribution):
    mean: float
    sigma_o: float
    provenance: str = ""

    def __post_init__(self) -> None:
        m = float(self.mean)
        if not math.isfinite(m):
            raise MoeError("Gaussian1D mean must be finite")
        object.__setattr__(self, "mean", m)
        object.__setattr__(self, "sigma_o", _check_positive("sigma_o", self.sigma_o))


def cholesky_pd(cov: np.ndarray, name: str = "covariance") -> np.ndarray:
    """Lower Cholesky factor of a symmetric positive-definite matrix.

    Raises :class:`MoeError` instead of regularising.
    """
    cov = np.asarray(cov, dtype=float)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
        raise MoeError(f"{name} must be a square matrix, got shape {cov.shape}")
    if not np.all(np.isfinite(cov)):
        raise MoeError(f"{name} has non-finite entries")
    scale = max(float(np.max(np.abs(cov))), np.finfo(float).tiny)
    if np.max(np.abs(cov - cov.T)) > 1e-12 * scale:
        raise MoeError(f"{name} is not symmetric")
    try:
        return np.linalg.cholesky(0.5 * (cov + cov.T))
    except np.linalg.LinAlgError:
        raise MoeError(f"{name} is not positive definite") from None


@dataclass(frozen=True)
class GaussianND(ObservationDistribution):
    mean: np.ndarray = field(compare=False)
    cov: np.ndarray = field(compare=False)
    provenance: str = ""

    def __post_init__(self) -> None:
        mean = np.atleast_1d(np.asarray(self.mean, dtype=float))
        cov = np.atleast_2d(np.asarray(self.cov, dtype=float))
        if cov.shape != (mean.size, mean.size):
            raise MoeError("GaussianND covariance shape does not match the mean")
        cholesky_pd(cov, "GaussianND cov")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)


def trapezoid_nd(values: np.ndarray, axes: Sequence[np.ndarray]) -> float:
    """Tensor-product trapezoid rule of ``values`` sampled on ``axes``."""
    out = np.asarray(values, dtype=float)
    for ax in reversed(axes):
        out = np.trapezoid(out, ax, axis=-1)
    return float(out)


@dataclass(frozen=True)
class Grid(ObservationDistribution):
    """Density sampled on a Cartesian grid.

    Mass within 1e-3 of one is renormalised on construction; anything further
    off is rejected.
    """

    axes: tuple[np.ndarray, ...] = field(compare=False)
    density: np.ndarray = field(compare=False)
    provenance: str = ""

    def __post_init__(self) -> None:
        axes = tuple(np.asarray(a, dtype=float) for a in self.axes)
        density = np.asarray(self.density, dtype=float)
        if not axes:
            raise MoeError("Grid needs at least one axis")
        for i, a in enumerate(axes):
            if a.ndim != 1 or a.size < 2 or np.any(np.diff(a) <= 0):
                raise MoeError(f"Grid axis {i} must be strictly increasing with >= 2 points")
        if density.shape != tuple(a.size for a in axes):
            raise MoeError(f"Grid density shape {density.shape} does not match the axes")
        if np.any(density < 0) or not np.all(np.isfinite(density)):
            raise MoeError("Grid density must be finite and non-negative")
        mass = trapezoid_nd(density, axes)
        if abs(mass - 1.0) > 1e-3:
            raise MoeError(f"Grid density integrates to {mass:.6g}, not 1")
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "density", density / mass)

    @property
    def ndim(self) -> int:
        return len(self.axes)

    def mass(self) -> float:
        return trapezoid_nd(self.density, self.axes)

    def points(self) -> np.ndarray:
        mesh = np.meshgrid(*self.axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)


# ---------------------------------------------------------------------------
# Set-based MOEs
# ---------------------------------------------------------------------------


def moe_sets(observed: Iterable, acceptable: Iterable) -> Moe:
    """Fraction of the observed elements that are acceptable."""
    o, s = set(observed), set(acceptable)
    if not o:
        raise MoeError("observed set is empty")
    return Moe(len(o & s) / len(o), "moe_sets")


def coverage_fraction(observed: Iterable, acceptable: Iterable) -> float:
    """Fraction of the acceptable set covered by the observations."""
    o, s = set(observed), set(acceptable)
    if not s:
        raise MoeError("acceptable set is empty")
    return len(o & s) / len(s)


# ---------------------------------------------------------------------------
# Sample and discrete MOEs
# ---------------------------------------------------------------------------


def moe_point(uf: UserFunction, x: Any) -> Moe:
    return Moe(uf(x), f"moe_point({type(uf).__name__})")


def moe_sample_mean(uf: UserFunction, samples: SampleSet | Sequence) -> Moe:
    """Mean user-function value over equally weighted samples."""
    if not isinstance(samples, SampleSet):
        samples = SampleSet(np.asarray(samples, dtype=float))
    vals = uf.evaluate_many(samples.samples)
    return Moe(float(np.mean(vals)), f"moe_sample_mean(n={len(vals)})")


def moe_discrete(f_s: DiscreteVector, p_o: DiscreteProb) -> Moe:
    """Scalar product of acceptance levels and class probabilities."""
    if tuple(f_s.labels) != tuple(p_o.labels):
        raise MoeError(f"label mismatch: {f_s.labels} vs {p_o.labels}")
    return Moe(math.fsum(f * p for f, p in zip(f_s.values, p_o.probs)), "moe_discrete")


def user_function_from_acceptance_probs(p_s: DiscreteProb | Sequence[float],
                                        labels: Sequence[Hashable] | None = None) -> DiscreteVector:
    """Rescale acceptance probabilities so that the largest becomes 1."""
    if isinstance(p_s, DiscreteProb):
        labels, probs = p_s.labels, p_s.probs
    else:
        probs = tuple(float(p) for p in p_s)
        labels = tuple(labels) if labels is not None else tuple(range(len(probs)))
    if any(p < 0 for p in probs):
        raise MoeError("acceptance probabilities must be non-negative")
    top = max(probs)
    if top <= 0.0:
        raise MoeError("acceptance probabilities are all zero")
    return DiscreteVector(tuple(labels), tuple(p / top for p in probs))


# ---------------------------------------------------------------------------
# Closed forms
# ---------------------------------------------------------------------------


def moe_gaussian_closed(sigma_o: float, sigma_s: float) -> Moe:
    """Gaussian user function against a zero-mean Gaussian error."""
    so = _check_positive("sigma_o", sigma_o)
    ss = _check_positive("sigma_s", sigma_s)
    return Moe(ss / math.hypot(ss, so), "moe_gaussian_closed")


def moe_window_gaussian(delta_eps: float, sigma_o: float) -> Moe:
    """Probability that a zero-mean Gaussian error lies within ``+-delta_eps``."""
    d = _check_positive("delta_eps", delta_eps)
    so = _check_positive("sigma_o", sigma_o)
    return Moe(math.erf(d / (math.sqrt(2.0) * so)), "moe_window_gaussian")


# ---------------------------------------------------------------------------
# Quadrature
# ---------------------------------------------------------------------------


def _kernel_spec(uf: UserFunction):
    if isinstance(uf, GaussianExp):
        return kernels.GAUSS_EXP, (uf.sigma_s, 0.0), (), ()
    if isinstance(uf, RationalHalf):
        return kernels.RATIONAL_HALF, (uf.a, 0.0), (), ()
    if isinstance(uf, UniformWindow):
        return kernels.UNIFORM_WINDOW, (uf.lower, uf.upper), (), ()
    if isinstance(uf, Tabulated):
        return kernels.TABULATED, (0.0, 0.0), tuple(uf.xs), tuple(uf.fs)
    return None


def integrate_gaussian_1d(uf: UserFunction, mean: float, sigma: float,
                          abs_tol: float = DEFAULT_ABS_TOL,
                          budget: int = DEFAULT_BUDGET) -> tuple[float, int]:
    """``integral uf(x) N(x; mean, sigma) dx`` by adaptive Simpson.

    The range ``mean +- 10 sigma`` is split at the user function's
    breakpoints; the tolerance is shared evenly across pieces and the
    subdivision budget across the whole integral. Returns the integral and
    the number of intervals used.
    """
    a = mean - GAUSS_HALF_WIDTH * sigma
    b = mean + GAUSS_HALF_WIDTH * sigma
    cuts = sorted({a, b, mean, *(p for p in uf.breakpoints() if a < p < b)})
    pieces = list(zip(cuts[:-1], cuts[1:]))
    tol = abs_tol / len(pieces)
    spec = _kernel_spec(uf)
    if spec is None:
        def integrand(x, _n=1.0 / (math.sqrt(2 * math.pi) * sigma)):
            return uf(x) * _n * math.exp(-0.5 * ((x - mean) / sigma) ** 2)
    total, used = 0.0, 0
    for lo, hi in pieces:
        remaining = budget - used
        if remaining <= 0:
            raise QuadratureError(f"adaptive Simpson exceeded {budget} intervals")
        if spec is None:
            val, n = kernels.simpson_callable(integrand, lo, hi, tol, remaining)
        else:
            kind, params, kx, kf = spec
            val, n = kernels.simpson_gauss(kind, params, kx, kf, mean, sigma, lo, hi, tol, remaining)
        total += val
        used += n
    return total, used


def moe_integrate(uf: UserFunction, dist: ObservationDistribution,
                  abs_tol: float = DEFAULT_ABS_TOL, budget: int = DEFAULT_BUDGET) -> Moe:
    """Overlap integral of a user function with an observation distribution.

    Point samples, sample sets and discrete probabilities reduce to their
    exact special cases. Gaussian densities use adaptive Simpson; gridded
    densities (up to three dimensions) use the trapezoid rule on the grid, so
    their accuracy is set by the grid spacing rather than ``abs_tol``.
    """
    if abs_tol <= 0:
        raise MoeError("abs_tol must be positive")
    note = f"; {dist.provenance}" if dist.provenance else ""
    if isinstance(dist, PointSample):
        return Moe(uf(dist.x), f"moe_integrate[point]{note}")
    if isinstance(dist, SampleSet):
        m = moe_sample_mean(uf, dist)
        return Moe(m.value, f"moe_integrate[samples]{note}")
    if isinstance(dist, DiscreteProb):
        if not isinstance(uf, DiscreteVector):
            raise UnsupportedDistribution("discrete observations need a DiscreteVector user function")
        return Moe(moe_discrete(uf, dist).value, f"moe_integrate[discrete]{note}")
    if isinstance(dist, GaussianND):
        if dist.mean.size != 1:
            raise UnsupportedDistribution(
                "multivariate Gaussian observations: tabulate on a Grid or use moe_dependent_sampled")
        dist = Gaussian1D(float(dist.mean[0]), math.sqrt(float(dist.cov[0, 0])), dist.provenance)
    if isinstance(dist, Gaussian1D):
        if isinstance(uf, DiscreteVector):
            raise UnsupportedDistribution("DiscreteVector user function over a continuous variable")
        val, used = integrate_gaussian_1d(uf, dist.mean, dist.sigma_o, abs_tol, budget)
        return Moe(val, f"moe_integrate[gauss1d, {used} intervals]{note}")
    if isinstance(dist, Grid):
        if dist.ndim > MAX_GRID_DIM:
            raise UnsupportedDistribution(f"grid dimension {dist.ndim} > {MAX_GRID_DIM}")
        if isinstance(uf, DiscreteVector):
            raise UnsupportedDistribution("DiscreteVector user function over a continuous variable")
        pts = dist.points()
        fvals = uf.evaluate_many(pts[:, 0] if dist.ndim == 1 else pts).reshape(dist.density.shape)
        return Moe(trapezoid_nd(fvals * dist.density, dist.axes), f"moe_integrate[grid{dist.ndim}d]{note}")
    raise UnsupportedDistribution(f"unsupported distribution {type(dist).__name__}")


def marginalize_grid(joint: Grid, keep_dims: Sequence[int]) -> Grid:
    """Integrate out the axes not in ``keep_dims`` (trapezoid rule)."""
    keep = sorted(int(d) for d in keep_dims)
    if not keep or len(set(keep)) != len(keep) or keep[0] < 0 or keep[-1] >= joint.ndim:
        raise MoeError(f"invalid keep_dims {list(keep_dims)} for a {joint.ndim}-D grid")
    if len(keep) == joint.ndim:
        return joint
    dens = joint.density
    for d in sorted(set(range(joint.ndim)) - set(keep), reverse=True):
        dens = np.trapezoid(dens, joint.axes[d], axis=d)
    axes = tuple(joint.axes[d] for d in keep)
    mass = trapezoid_nd(dens, axes)
    if mass <= 0:
        raise MoeError("marginal has zero mass")
    return Grid(axes, dens / mass, joint.provenance)


# ---------------------------------------------------------------------------
# Combining MOEs
# ---------------------------------------------------------------------------


def _values(moes: Sequence[Moe | float]) -> list[float]:
    vals = [_value(m) for m in moes]
    if not vals:
        raise MoeError("need at least one MOE")
    return vals


def combine_product(moes: Sequence[Moe | float]) -> Moe:
    """Joint MOE of independent variables: the product."""
    return Moe(math.prod(_values(moes)), "combine_product")


def combine_geometric(moes: Sequence[Moe | float]) -> Moe:
    """Product referred back to one dimension (geometric mean)."""
    vals = _values(moes)
    return Moe(math.prod(vals) ** (1.0 / len(vals)), "combine_geometric")


def moe_dependent_sampled(ufs: Sequence[UserFunction], joint_samples: Any) -> Moe:
    """Geometric-referred MOE from joint samples of dependent variables.

    Row ``k`` of ``joint_samples`` holds one draw of all ``J`` variables; the
    per-row product of user-function values is averaged and the ``J``-th
    root taken.
    """
    x = np.asarray(joint_samples, dtype=float)
    if x.ndim == 1:
        x = x.reshape(-1, 1)
    if x.ndim != 2 or x.shape[0] == 0:
        raise MoeError("joint_samples must be a non-empty K x J matrix")
    if x.shape[1] != len(ufs):
        raise MoeError(f"{x.shape[1]} sample columns for {len(ufs)} user functions")
    prod = np.ones(x.shape[0])
    for j, uf in enumerate(ufs):
        prod *= uf.evaluate_many(x[:, j])
    return Moe(float(np.mean(prod)) ** (1.0 / len(ufs)), f"moe_dependent_sampled(K={x.shape[0]})")


def moe_ignorance_association(per_association_moes: Sequence[Moe | float]) -> Moe:
    """Equal-weight mean over all candidate target-to-track associations."""
    vals = _values(per_association_moes)
    return Moe(math.fsum(vals) / len(vals), "moe_ignorance_association")


def uniform_discrete(elements: Iterable[Hashable], over: Sequence[Hashable]) -> DiscreteProb:
    """Uniform probability over ``elements`` expressed on the label list ``over``."""
    members = set(elements)
    if not members:
        raise MoeError("empty support")
    p = 1.0 / len(members)
    return DiscreteProb(tuple(over), tuple(p if lab in members else 0.0 for lab in over))


def indicator_vector(elements: Iterable[Hashable], over: Sequence[Hashable]) -> DiscreteVector:
    """0/1 acceptance vector for the set ``elements`` on the label list ``over``."""
    members = set(elements)
    return DiscreteVector(tuple(over), tuple(1.0 if lab in members else 0.0 for lab in over))
