"""q-Gaussian likelihoods and the linear-vs-quadratic regression experiment.

Six observations sit at ``x = -1, -1, 0, 0, 1, 1`` with values
``a, -a, delta + a, delta - a, a, -a``.  Data set ``D1`` holds the first four
points and ``D2`` all six; hypothesis ``h1`` is a straight line and ``h2`` a
parabola, both with unit-variance q-Gaussian noise.  Fitting each hypothesis
to each data set by maximum likelihood gives the 2 x 2 matrix whose
Cooperative Index is swept over ``(a, delta)``.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import IO, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.special import gammaln

from .core import CoopIndexError
from .sinkhorn import DEFAULT_MAX_ITER, DEFAULT_TOL, NoPositiveDiagonalError, cooperative_index

Q_MAX = 5.0 / 3.0
DEFAULT_FIT_STEP = 1e-3
DEFAULT_AXIS_STEP = 0.05
DEFAULT_AXIS_MAX = 3.0

# relative margin before an off-centre fit counts as strictly better
_MIDPOINT_RTOL = 1e-9


class NoFeasibleFitError(CoopIndexError):
    """Every candidate offset gives zero likelihood."""


def normalizer(q: float) -> float:
    """The constant ``C_q`` in ``N_q(z) = sqrt(beta) / C_q * e_q(-beta z^2)``."""
    if q < 1:
        return math.exp(
            math.log(2 * math.sqrt(math.pi))
            + gammaln(1 / (1 - q))
            - math.log((3 - q) * math.sqrt(1 - q))
            - gammaln((3 - q) / (2 * (1 - q)))
        )
    if q == 1:
        return math.sqrt(math.pi)
    if q < 3:
        return math.exp(
            0.5 * math.log(math.pi)
            + gammaln((3 - q) / (2 * (q - 1)))
            - 0.5 * math.log(q - 1)
            - gammaln(1 / (q - 1))
        )
    raise ValueError(f"q-Gaussian needs q < 3, got {q}")


def q_exponential(x: ArrayLike, q: float) -> NDArray[np.float64]:
    """``[1 + (1 - q) x]_+ ** (1 / (1 - q))``, or ``exp(x)`` at ``q = 1``."""
    x = np.asarray(x, dtype=np.float64)
    if q == 1:
        return np.exp(x)
    base = 1.0 + (1.0 - q) * x
    out = np.zeros_like(base)
    pos = base > 0
    out[pos] = base[pos] ** (1.0 / (1.0 - q))
    return out


@dataclass(frozen=True)
class QGaussian:
    """Unit-variance q-Gaussian centred at ``mu``.

    ``beta = 1 / (5 - 3q)`` fixes the variance at one, which needs
    ``q < 5/3``.  For ``q < 1`` the density vanishes outside
    ``|z - mu| < support_radius``.
    """

    q: float
    mu: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.q) or self.q >= Q_MAX:
            raise ValueError(f"unit-variance q-Gaussian needs q < 5/3, got q={self.q}")

    @property
    def beta(self) -> float:
        return 1.0 / (5.0 - 3.0 * self.q)

    @property
    def support_radius(self) -> float:
        if self.q >= 1:
            return math.inf
        return 1.0 / math.sqrt(self.beta * (1.0 - self.q))

    def pdf(self, z: ArrayLike) -> NDArray[np.float64]:
        z = np.asarray(z, dtype=np.float64)
        d = z - self.mu
        return math.sqrt(self.beta) / normalizer(self.q) * q_exponential(-self.beta * d * d, self.q)


def q_gaussian_density(z: ArrayLike, params: QGaussian) -> NDArray[np.float64] | float:
    """Density of ``params`` at ``z``; scalar in, scalar out."""
    out = params.pdf(z)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class FitGrid:
    """Candidate offsets ``lo, lo + step, ...`` up to ``hi`` (inclusive)."""

    lo: float
    hi: float
    step: float = DEFAULT_FIT_STEP

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError("fit step must be positive")
        if not self.lo < self.hi:
            raise ValueError("fit grid needs lo < hi")

    def points(self) -> NDArray[np.float64]:
        n = int(math.floor((self.hi - self.lo) / self.step + 1e-9)) + 1
        return self.lo + self.step * np.arange(n)

    @classmethod
    def around(cls, values: Sequence[float], margin: float = 1.0, step: float = DEFAULT_FIT_STEP) -> FitGrid:
        return cls(min(values) - margin, max(values) + margin, step)


def _best_offset(ys: NDArray, q: float, grid: FitGrid) -> tuple[float, float]:
    b = grid.points()
    dens = QGaussian(q).pdf(ys[None, :] - b[:, None])
    with np.errstate(divide="ignore"):
        loglik = np.log(dens).sum(axis=1)
    k = int(np.argmax(loglik))  # first maximum, i.e. the smallest b on ties
    if not np.isfinite(loglik[k]):
        raise NoFeasibleFitError(
            f"no offset in [{grid.lo}, {grid.hi}] gives positive likelihood for q={q}"
        )
    return float(b[k]), float(np.prod(dens[k]))


def ml_horizontal_fit(ys: Sequence[float], q: float, grid: FitGrid | None = None) -> tuple[float, float]:
    """Grid-search the constant ``b`` maximizing ``prod_i N_q(y_i - b)``.

    Returns ``(b, likelihood)``.  Ties go to the smallest ``b``.
    """
    ys = np.asarray(ys, dtype=np.float64)
    if grid is None:
        grid = FitGrid.around(ys)
    return _best_offset(ys, q, grid)


@dataclass(frozen=True)
class RegressionScenario:
    a: float
    delta: float
    q: float
    fit_grid: FitGrid | None = None

    def __post_init__(self):
        if not (self.a > 0 and self.delta > 0):
            raise ValueError("a and delta must be positive")
        QGaussian(self.q)

    @property
    def xs(self) -> tuple[float, ...]:
        return (-1.0, -1.0, 0.0, 0.0, 1.0, 1.0)

    @property
    def ys(self) -> tuple[float, ...]:
        a, d = self.a, self.delta
        return (a, -a, d + a, d - a, a, -a)

    @property
    def grid(self) -> FitGrid:
        if self.fit_grid is not None:
            return self.fit_grid
        r = self.delta + self.a + 1.0
        return FitGrid(-r, r, DEFAULT_FIT_STEP)


@dataclass(frozen=True)
class RegressionFit:
    """The 2 x 2 likelihood matrix plus the fits behind it.

    ``matrix`` rows are ``(D1, D2)`` and columns ``(h1 line, h2 parabola)``.
    ``pair_likelihood`` is the best likelihood of one ``(+a, -a)`` pair of
    points sharing an x-location, found by grid search; ``midpoint_pair``
    is the same pair fitted through its midpoint, ``N_q(a)^2``.
    ``midpoint_is_optimal`` is False when the search found a strictly
    better off-centre fit, in which case the D2 / parabola entry (taken at
    the midpoints) understates the true maximum likelihood.
    """

    matrix: NDArray[np.float64]
    line_offset: float | None
    pair_offset: float
    pair_likelihood: float
    midpoint_pair: float
    midpoint_is_optimal: bool


def fit_regression(scenario: RegressionScenario) -> RegressionFit:
    """Maximum-likelihood fits of both hypotheses to both data sets."""
    q, a = scenario.q, scenario.a
    grid = scenario.grid
    density = QGaussian(q)
    midpoint_pair = float(density.pdf(a)) ** 2

    # both polynomials pass through one free value at each of D1's two x-locations
    try:
        pair_offset, pair_like = _best_offset(np.array([a, -a]), q, grid)
    except NoFeasibleFitError:
        pair_offset, pair_like = 0.0, 0.0
    m_d1 = pair_like**2

    try:
        line_offset, m21 = ml_horizontal_fit(scenario.ys, q, grid)
    except NoFeasibleFitError:
        line_offset, m21 = None, 0.0

    m22 = midpoint_pair**3
    M = np.array([[m_d1, m_d1], [m21, m22]])
    return RegressionFit(
        matrix=M,
        line_offset=line_offset,
        pair_offset=pair_offset,
        pair_likelihood=pair_like,
        midpoint_pair=midpoint_pair,
        midpoint_is_optimal=pair_like <= midpoint_pair * (1 + _MIDPOINT_RTOL),
    )


def build_regression_matrix(scenario: RegressionScenario) -> NDArray[np.float64]:
    """Likelihood matrix over data sets ``(D1, D2)`` x hypotheses ``(line, parabola)``.

    An infeasible fit contributes a zero entry rather than an error.
    """
    return fit_regression(scenario).matrix


@dataclass(frozen=True)
class PhaseDiagram:
    """CI over an ``(a, delta)`` grid; ``ci_values[k, j]`` is at ``(a_values[j], delta_values[k])``.

    Cells whose matrix has no Sinkhorn limit hold NaN.
    """

    q: float
    a_values: NDArray[np.float64]
    delta_values: NDArray[np.float64]
    ci_values: NDArray[np.float64]

    def optimal_a_columns(self) -> NDArray[np.float64]:
        """The ``a`` values whose CI equals 1 at every ``delta``."""
        ok = np.all(self.ci_values == 1.0, axis=0)
        return self.a_values[ok]

    def write_csv(self, fh: IO[str], precision: int = 6) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["a", "delta", "ci"])
        for k, d in enumerate(self.delta_values):
            for j, a in enumerate(self.a_values):
                ci = self.ci_values[k, j]
                w.writerow([f"{a:.{precision}f}", f"{d:.{precision}f}", "" if np.isnan(ci) else f"{ci:.{precision}f}"])


def axis_grid(start: float, stop: float, step: float) -> NDArray[np.float64]:
    """``start, start + step, ...`` through ``stop`` inclusive, computed by multiplication."""
    if not step > 0 or stop < start:
        raise ValueError("axis grid needs step > 0 and start <= stop")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return np.round(start + step * np.arange(n), 12)


def default_axis() -> NDArray[np.float64]:
    """``0.05, 0.10, ..., 3.00``."""
    return axis_grid(DEFAULT_AXIS_STEP, DEFAULT_AXIS_MAX, DEFAULT_AXIS_STEP)


def cell_ci(q: float, a: float, delta: float, fit_step: float = DEFAULT_FIT_STEP,
            max_iter: int = DEFAULT_MAX_ITER, tol: float = DEFAULT_TOL) -> float:
    """Structural-mode CI of one scenario; NaN if the matrix has no positive diagonal."""
    r = delta + a + 1.0
    scenario = RegressionScenario(a, delta, q, FitGrid(-r, r, fit_step))
    M = build_regression_matrix(scenario)
    try:
        return cooperative_index(M, mode="structural", max_iter=max_iter, tol=tol)
    except NoPositiveDiagonalError:
        return math.nan


def _cell(args):
    return cell_ci(*args)


def phase_diagram(
    q: float,
    a_grid: ArrayLike | None = None,
    delta_grid: ArrayLike | None = None,
    fit_step: float = DEFAULT_FIT_STEP,
    workers: int = 1,
    max_iter: int = DEFAULT_MAX_ITER,
    tol: float = DEFAULT_TOL,
) -> PhaseDiagram:
    """Sweep the structural-mode CI of the regression matrix over ``(a, delta)``.

    Cells are independent; ``workers > 1`` farms them out to processes and
    gives the same grid as a serial run.
    """
    QGaussian(q)
    a_vals = default_axis() if a_grid is None else np.asarray(a_grid, dtype=np.float64)
    d_vals = default_axis() if delta_grid is None else np.asarray(delta_grid, dtype=np.float64)
    jobs = [(q, float(a), float(d), fit_step, max_iter, tol) for d in d_vals for a in a_vals]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            flat = list(pool.map(_cell, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        flat = [_cell(j) for j in jobs]
    ci = np.array(flat, dtype=np.float64).reshape(len(d_vals), len(a_vals))
    return PhaseDiagram(q, a_vals, d_vals, ci)
