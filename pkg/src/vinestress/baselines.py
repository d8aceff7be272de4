"""Linear quantile regression, expectile regression and crossing detection.

The quantile fit minimizes the pinball objective

    sum_i ((1 - a) I(y_i < q_i) + a I(y_i >= q_i)) |y_i - q_i|,   q_i = b0 + b'x_i,

solved exactly as a linear program.  The expectile fit replaces the absolute
value by a square and is computed by iteratively reweighted least squares;
at level 0.5 it coincides with ordinary least squares.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg, optimize

from .exceptions import InputError, NumericalError


def pinball_loss(y, pred, level: float) -> float:
    """Average-free pinball objective (sum, not mean)."""
    r = np.asarray(y, dtype=float) - np.asarray(pred, dtype=float)
    return float(np.sum(np.where(r >= 0, level * r, (level - 1.0) * r)))


def expectile_loss(y, pred, level: float) -> float:
    r = np.asarray(y, dtype=float) - np.asarray(pred, dtype=float)
    w = np.where(r >= 0, level, 1.0 - level)
    return float(np.sum(w * r * r))


@dataclass(frozen=True)
class LinearFit:
    """Linear fit at one quantile/expectile level; ``coef[0]`` is the intercept."""

    level: float
    coef: np.ndarray
    objective: float
    method: str

    def __post_init__(self):
        object.__setattr__(self, "coef", np.asarray(self.coef, dtype=float))
        if not 0.0 < self.level < 1.0:
            raise InputError("level must lie strictly inside (0, 1)")
        if not np.isfinite(self.objective):
            raise InputError("objective must be finite")

    def predict(self, X) -> np.ndarray:
        X = _as_design(X)
        if X.shape[1] + 1 != self.coef.shape[0]:
            raise InputError(
                f"fit has {self.coef.shape[0] - 1} covariates, got {X.shape[1]}"
            )
        return self.coef[0] + X @ self.coef[1:]


def _as_design(X) -> np.ndarray:
    if X is None:
        return np.zeros((0, 0))
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise InputError("covariate matrix must be 1-D or 2-D")
    return X


def _checked_design(X, y):
    y = np.asarray(y, dtype=float).ravel()
    X = _as_design(X)
    if X.size == 0:
        X = np.zeros((y.shape[0], 0))
    if X.shape[0] != y.shape[0]:
        raise InputError("X and y must have the same number of rows")
    n, p = X.shape
    if n < p + 2:
        raise InputError(f"need at least {p + 2} rows for {p} covariates, got {n}")
    design = np.column_stack([np.ones(n), X])
    # pivoted QR exposes which columns are linearly dependent
    _, r, piv = linalg.qr(design, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    tol = max(design.shape) * np.finfo(float).eps * (diag[0] if diag.size else 1.0)
    rank = int(np.sum(diag > tol))
    if rank < p + 1:
        bad = sorted(piv[rank:])
        names = ["intercept" if k == 0 else f"column {k - 1}" for k in bad]
        raise InputError(f"design matrix is rank-deficient; dependent: {', '.join(names)}")
    return design, y


def fit_linear_quantile(X, y, level: float) -> LinearFit:
    """Exact pinball-loss minimizer via linear programming.

    Decision variables are the coefficients plus positive/negative residual
    parts; the optimum is the true LP minimum, so ties in the minimizing set
    are resolved arbitrarily by the solver.
    """
    if not 0.0 < level < 1.0:
        raise InputError("level must lie strictly inside (0, 1)")
    design, y = _checked_design(X, y)
    n, k = design.shape
    c = np.concatenate([np.zeros(k), np.full(n, level), np.full(n, 1.0 - level)])
    a_eq = np.hstack([design, np.eye(n), -np.eye(n)])
    bounds = [(None, None)] * k + [(0, None)] * (2 * n)
    res = optimize.linprog(c, A_eq=a_eq, b_eq=y, bounds=bounds, method="highs")
    if not res.success:
        raise NumericalError(f"quantile LP failed: {res.message}")
    coef = res.x[:k]
    return LinearFit(
        level=level,
        coef=coef,
        objective=pinball_loss(y, design @ coef, level),
        method="quantile",
    )


def fit_expectile(
    X, y, level: float, *, tol: float = 1e-10, max_iter: int = 500
) -> LinearFit:
    """Asymmetric least squares by iteratively reweighted least squares.

    Weights are ``level`` for nonnegative residuals and ``1 - level``
    otherwise; iteration stops when the coefficients move less than ``tol``.
    """
    if not 0.0 < level < 1.0:
        raise InputError("level must lie strictly inside (0, 1)")
    design, y = _checked_design(X, y)
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    for _ in range(max_iter):
        r = y - design @ coef
        w = np.where(r >= 0, level, 1.0 - level)
        sw = np.sqrt(w)
        new_coef, *_ = np.linalg.lstsq(design * sw[:, None], y * sw, rcond=None)
        step = float(np.max(np.abs(new_coef - coef)))
        coef = new_coef
        if step < tol:
            break
    else:
        raise NumericalError(
            f"expectile IRLS did not converge in {max_iter} iterations "
            f"(last step {step:.3e}, coef {coef})"
        )
    return LinearFit(
        level=level,
        coef=coef,
        objective=expectile_loss(y, design @ coef, level),
        method="expectile",
    )


@dataclass(frozen=True)
class CrossingReport:
    """Counts of quantile crossings between adjacent levels on a point grid."""

    levels: tuple[float, ...]
    total: int
    by_pair: tuple[int, ...]
    by_point: tuple[int, ...]

    @property
    def has_crossings(self) -> bool:
        return self.total > 0


def detect_crossings(fits, X_eval, *, tol: float = 1e-12) -> CrossingReport:
    """Count evaluation points where a lower level predicts above a higher one."""
    fits = list(fits)
    if len(fits) < 2:
        raise InputError("need at least 2 fits to detect crossings")
    levels = [f.level for f in fits]
    if any(b <= a for a, b in zip(levels, levels[1:])):
        raise InputError("fits must be ordered by strictly increasing level")
    preds = np.stack([f.predict(X_eval) for f in fits])
    gaps = preds[:-1] - preds[1:]  # positive gap = lower level above higher
    crossing = gaps > tol
    return CrossingReport(
        levels=tuple(levels),
        total=int(crossing.sum()),
        by_pair=tuple(int(c) for c in crossing.sum(axis=1)),
        by_point=tuple(int(c) for c in crossing.sum(axis=0)),
    )
