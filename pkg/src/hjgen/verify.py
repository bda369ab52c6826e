"""Finite-difference residual verification and oracle comparison.

Residuals use second-order central differences of the stored value field
only (boundary points and points with an unusable neighbour are excluded),
so a report's ``max_abs`` carries an O(h^2) truncation floor on top of the
solver tolerances.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

from . import expr
from .errors import DomainError, EmptyReportError
from .hj import HJProblem
from .pq import PQProblem

__all__ = ["ResidualReport", "finite_diff_partials", "residual_report", "compare_oracle"]


@dataclass(frozen=True)
class ResidualReport:
    max_abs: float
    mean_abs: float
    worst_point: tuple[int, int]
    resolved_fraction: float
    h_used: float


def _three_point(xm, x0, xp, fm, f0, fp):
    # asymmetric 3-point first derivative; exact for quadratics, reduces to
    # (fp - fm) / (2h) on uniform spacing
    h1 = x0 - xm
    h2 = xp - x0
    return (
        -(h2 / (h1 * (h1 + h2))) * fm
        + ((h2 - h1) / (h1 * h2)) * f0
        + (h1 / (h2 * (h1 + h2))) * fp
    )


def finite_diff_partials(field, i: int, j: int) -> Optional[tuple[float, float]]:
    """Central-difference estimates of (d value/d axis1, d value/d axis2).

    Returns ``None`` (skip signal) at boundary points or when the point or
    any of its four axis neighbours carries no value.
    """
    n1, n2 = field.shape
    if not (0 < i < n1 - 1 and 0 < j < n2 - 1):
        return None
    cells = (
        field.value[i][j],
        field.value[i - 1][j],
        field.value[i + 1][j],
        field.value[i][j - 1],
        field.value[i][j + 1],
    )
    if any(c is None for c in cells):
        return None
    f0, fx_m, fx_p, fy_m, fy_p = cells
    d1 = _three_point(field.axis1[i - 1], field.axis1[i], field.axis1[i + 1], fx_m, f0, fx_p)
    d2 = _three_point(field.axis2[j - 1], field.axis2[j], field.axis2[j + 1], fy_m, f0, fy_p)
    return d1, d2


def _residual_fn(problem) -> Callable[[float, float, float, float], float]:
    if isinstance(problem, HJProblem):

        def hj_residual(x, t, d1, d2):
            b = {"x": x}
            a = expr.evaluate(problem.kinetic, b)
            v = expr.evaluate(problem.potential, b)
            return a * d1 * d1 + v - d2

        return hj_residual
    if not isinstance(problem, PQProblem):
        raise TypeError(f"unsupported problem type {type(problem)!r}")
    if problem.kind == "explicit":

        def explicit_residual(x, y, d1, d2):
            return d1 - expr.evaluate(problem.f_of_q, {"q": d2})

        return explicit_residual
    if problem.kind == "scaled_x":

        def scaled_x_residual(x, y, d1, d2):
            return d1 - problem.ratio_slope_at(x) * expr.evaluate(problem.gfun, {"q": d2})

        return scaled_x_residual

    def scaled_y_residual(x, y, d1, d2):
        return d2 - expr.evaluate(problem.gfun, {"p": d1}) * problem.ratio_slope_at(y)

    return scaled_y_residual


def residual_report(problem, field) -> ResidualReport:
    """PDE residual statistics over the interior value-bearing points.

    The residual is a(x) d1^2 + V(x) - d2 for Hamilton-Jacobi fields and the
    derivative-branch identity for the first-order kinds (d1 - f(d2) when
    explicit, with the scale-ratio slope folded in for the scaled kinds).
    """
    n1, n2 = field.shape
    if n1 < 3 or n2 < 3:
        raise ValueError("residual_report needs at least 3 points per axis")
    fn = _residual_fn(problem)
    worst = (0, 0)
    max_abs = -1.0
    total = 0.0
    count = 0
    for i in range(1, n1 - 1):
        for j in range(1, n2 - 1):
            if not field.has_value(i, j):
                continue
            ds = finite_diff_partials(field, i, j)
            if ds is None:
                continue
            try:
                r = abs(fn(field.axis1[i], field.axis2[j], ds[0], ds[1]))
            except DomainError:
                continue
            count += 1
            total += r
            if r > max_abs:
                max_abs = r
                worst = (i, j)
    if count == 0:
        raise EmptyReportError("no usable interior point for a residual report")
    h_used = max(
        max(b - a for a, b in zip(field.axis1, field.axis1[1:])),
        max(b - a for a, b in zip(field.axis2, field.axis2[1:])),
    )
    return ResidualReport(
        max_abs=max_abs,
        mean_abs=total / count,
        worst_point=worst,
        resolved_fraction=field.resolved_fraction(),
        h_used=h_used,
    )


def compare_oracle(field, oracle: Callable[[float, float], float]) -> tuple[float, float]:
    """(max, mean) absolute deviation of the stored values from ``oracle``."""
    max_err = -1.0
    total = 0.0
    count = 0
    n1, n2 = field.shape
    for i in range(n1):
        for j in range(n2):
            if not field.has_value(i, j):
                continue
            err = abs(field.value[i][j] - oracle(field.axis1[i], field.axis2[j]))
            count += 1
            total += err
            if err > max_err:
                max_err = err
    if count == 0:
        raise EmptyReportError("no value-bearing point to compare against the oracle")
    return max_err, total / count
