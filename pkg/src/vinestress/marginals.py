"""Marginal handling: differencing, empirical PIT and rank-based diagnostics.

Raw sector-PD level series are differenced month over month and mapped to
the copula scale with empirical distribution functions.  Pseudo-observations
use average ranks divided by ``n + 1`` so every value stays strictly inside
the unit interval; the empirical quantile function interpolates linearly
between order statistics at the same plotting positions, which makes the
PIT invertible on sample points.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .exceptions import DegenerateInputError, InputError

# Copula-scale values are clamped into [UNIT_EPS, 1 - UNIT_EPS] before any
# density or h-function evaluation; several families diverge at the corners.
UNIT_EPS = 1e-10


def clamp_unit(u):
    """Clamp copula-scale values into the open unit interval."""
    return np.clip(u, UNIT_EPS, 1.0 - UNIT_EPS)


def _month_index(date: str) -> int:
    """Parse ``YYYY-MM`` into a single month counter."""
    parts = date.strip().split("-")
    if len(parts) != 2:
        raise InputError(f"date {date!r} is not in YYYY-MM format")
    try:
        year, month = int(parts[0]), int(parts[1])
    except ValueError as exc:
        raise InputError(f"date {date!r} is not in YYYY-MM format") from exc
    if not 1 <= month <= 12:
        raise InputError(f"date {date!r} has month outside 1..12")
    return year * 12 + (month - 1)


def month_sequence(start: str, count: int) -> tuple[str, ...]:
    """Return ``count`` consecutive months starting at ``start`` (YYYY-MM)."""
    idx = _month_index(start)
    out = []
    for k in range(count):
        total = idx + k
        out.append(f"{total // 12:04d}-{total % 12 + 1:02d}")
    return tuple(out)


@dataclass(frozen=True)
class RawPanel:
    """Monthly PD levels per sector.

    ``values`` has one row per date and one column per label.
    """

    dates: tuple[str, ...]
    labels: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "dates", tuple(self.dates))
        object.__setattr__(self, "labels", tuple(str(c) for c in self.labels))
        if values.ndim != 2:
            raise InputError("panel values must be a 2-D array")
        n, d = values.shape
        if n < 3:
            raise InputError(f"panel needs at least 3 rows, got {n}")
        if len(self.dates) != n:
            raise InputError(f"{len(self.dates)} dates for {n} rows")
        if len(self.labels) != d:
            raise InputError(f"{len(self.labels)} labels for {d} columns")
        if len(set(self.labels)) != d:
            raise InputError("column labels must be unique")
        if not np.all(np.isfinite(values)):
            raise InputError("panel contains non-finite values")
        idx = [_month_index(s) for s in self.dates]
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise InputError("dates must be strictly increasing")

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    def column(self, label: str) -> np.ndarray:
        return self.values[:, self.labels.index(label)]


@dataclass(frozen=True)
class DiffPanel:
    """First differences of a :class:`RawPanel`; ``source_length`` rows minus one."""

    dates: tuple[str, ...]
    labels: tuple[str, ...]
    values: np.ndarray
    source_length: int

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "dates", tuple(self.dates))
        object.__setattr__(self, "labels", tuple(self.labels))
        if values.shape[0] != self.source_length - 1:
            raise InputError("differenced panel must have source_length - 1 rows")

    def column(self, label: str) -> np.ndarray:
        return self.values[:, self.labels.index(label)]


class MarginalEcdf:
    """Empirical marginal distribution built from one differenced series.

    Evaluation returns values strictly inside (0, 1) using average ranks over
    ``n + 1``; the quantile function interpolates order statistics placed at
    plotting positions ``k / (n + 1)``.
    """

    def __init__(self, sample):
        sample = np.asarray(sample, dtype=float).ravel()
        if sample.size < 2:
            raise InputError("ECDF needs at least 2 observations")
        if not np.all(np.isfinite(sample)):
            raise InputError("ECDF sample contains non-finite values")
        self._sorted = np.sort(sample)
        self._n = sample.size
        self._positions = np.arange(1, self._n + 1) / (self._n + 1.0)

    @property
    def n(self) -> int:
        return self._n

    @property
    def sorted_values(self) -> np.ndarray:
        return self._sorted

    def evaluate(self, x):
        """Map data-scale values to (0, 1).

        Sample points get their (average-)rank value; other points are
        linearly interpolated between neighbouring order statistics and
        clamped to the extreme plotting positions outside the sample range.
        """
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        xv = np.atleast_1d(x)
        lt = np.searchsorted(self._sorted, xv, side="left")
        le = np.searchsorted(self._sorted, xv, side="right")
        n_eq = le - lt
        tie_u = (lt + (n_eq + 1) / 2.0) / (self._n + 1.0)
        interp_u = np.interp(xv, self._sorted, self._positions)
        u = np.where(n_eq > 0, tie_u, interp_u)
        return float(u[0]) if scalar else u

    def quantile(self, u):
        """Inverse map from (0, 1) back to the data scale."""
        u = np.asarray(u, dtype=float)
        scalar = u.ndim == 0
        uv = np.atleast_1d(u)
        if np.any(uv <= 0.0) or np.any(uv >= 1.0):
            raise InputError("quantile level must lie strictly inside (0, 1)")
        x = np.interp(uv, self._positions, self._sorted)
        return float(x[0]) if scalar else x


@dataclass(frozen=True)
class PseudoPanel:
    """Copula-scale observations with the marginal ECDFs that produced them."""

    labels: tuple[str, ...]
    u: np.ndarray
    ecdfs: tuple[MarginalEcdf, ...]
    dates: tuple[str, ...] | None = None

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "ecdfs", tuple(self.ecdfs))
        if u.ndim != 2 or u.shape[1] != len(self.labels):
            raise InputError("pseudo-observation matrix does not match labels")
        if np.any(u <= 0.0) or np.any(u >= 1.0):
            raise InputError("pseudo-observations must lie strictly inside (0, 1)")
        if self.ecdfs and len(self.ecdfs) != len(self.labels):
            raise InputError("one ECDF per column expected")

    @property
    def n_rows(self) -> int:
        return self.u.shape[0]

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise InputError(f"unknown column label {label!r}") from None

    def column(self, label: str) -> np.ndarray:
        return self.u[:, self.index(label)]

    def ecdf(self, label: str) -> MarginalEcdf:
        if not self.ecdfs:
            raise InputError("panel carries no marginal ECDFs")
        return self.ecdfs[self.index(label)]


def difference(panel: RawPanel) -> DiffPanel:
    """Month-over-month first differences of the PD levels."""
    if panel.n_rows < 2:
        raise InputError("need at least 2 rows to difference")
    diffs = np.diff(panel.values, axis=0)
    return DiffPanel(
        dates=panel.dates[1:],
        labels=panel.labels,
        values=diffs,
        source_length=panel.n_rows,
    )


def pit_transform(panel: DiffPanel) -> PseudoPanel:
    """Probability integral transform of each column via its empirical CDF.

    Entry (i, j) is ``rank(x_ij) / (n + 1)`` with average ranks for ties.
    """
    values = panel.values
    if values.shape[0] < 2:
        raise InputError("need at least 2 observations per column")
    n = values.shape[0]
    u = np.empty_like(values)
    ecdfs = []
    for j in range(values.shape[1]):
        col = values[:, j]
        u[:, j] = stats.rankdata(col, method="average") / (n + 1.0)
        ecdfs.append(MarginalEcdf(col))
    return PseudoPanel(labels=panel.labels, u=u, ecdfs=tuple(ecdfs), dates=panel.dates)


def pit_inverse(ecdf: MarginalEcdf, u):
    """Empirical quantile of ``u``; inverse of the PIT on sample points."""
    return ecdf.quantile(u)


def kendall_tau(x, y) -> float:
    """Tie-adjusted Kendall rank correlation (tau-b)."""
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.size != y.size:
        raise InputError("series must have equal length")
    if x.size < 2:
        raise InputError("need at least 2 observations")
    if np.ptp(x) == 0.0 or np.ptp(y) == 0.0:
        raise DegenerateInputError("Kendall's tau is undefined for a constant series")
    return float(stats.kendalltau(x, y).statistic)


def kendall_tau_matrix(panel: PseudoPanel | DiffPanel) -> np.ndarray:
    """Pairwise Kendall's tau between all columns of a panel."""
    values = panel.u if isinstance(panel, PseudoPanel) else panel.values
    d = values.shape[1]
    out = np.eye(d)
    for i in range(d):
        for j in range(i + 1, d):
            out[i, j] = out[j, i] = kendall_tau(values[:, i], values[:, j])
    return out


def autocorr(x, max_lag: int) -> np.ndarray:
    """Sample autocorrelations at lags ``1 .. max_lag``."""
    x = np.asarray(x, dtype=float).ravel()
    if max_lag < 1:
        raise InputError("max_lag must be at least 1")
    if max_lag >= x.size:
        raise InputError("max_lag must be smaller than the series length")
    centered = x - x.mean()
    denom = float(centered @ centered)
    if denom == 0.0:
        raise DegenerateInputError("autocorrelation is undefined for a constant series")
    return np.array(
        [float(centered[k:] @ centered[:-k]) / denom for k in range(1, max_lag + 1)]
    )


@dataclass(frozen=True)
class AutocorrReport:
    """Per-column autocorrelations with flags at the 5% band ``1.96 / sqrt(n)``."""

    labels: tuple[str, ...]
    acf: dict[str, np.ndarray] = field(repr=False)
    threshold: float = 0.0

    @property
    def flagged(self) -> tuple[str, ...]:
        return tuple(
            lab for lab in self.labels if np.any(np.abs(self.acf[lab]) > self.threshold)
        )


def autocorr_check(panel: DiffPanel, max_lag: int) -> AutocorrReport:
    """Autocorrelations of every differenced column plus 5%-band flags."""
    n = panel.values.shape[0]
    acf = {lab: autocorr(panel.column(lab), max_lag) for lab in panel.labels}
    return AutocorrReport(labels=panel.labels, acf=acf, threshold=1.96 / np.sqrt(n))
