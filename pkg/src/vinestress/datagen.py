"""Synthetic ground-truth panels and file formats.

Generation draws copula-scale rows from a known dependence structure (a
Gaussian correlation matrix or an explicit D-vine), maps them through a
heavy-tailed marginal to monthly PD differences, and cumulates to PD level
series.  This gives every pipeline stage a verifiable oracle since real
sector-PD panels are not distributable.

All randomness flows through ``numpy.random.default_rng`` (PCG64), a named,
seedable generator, so a spec plus seed reproduces a panel bit for bit.

File formats
------------
* panel CSV: ``date`` column in ``YYYY-MM`` plus one numeric column per
  sector; header mandatory, no missing cells, 17 significant digits.
* pseudo-observation CSV: same scheme, values strictly inside (0, 1).
* marginals sidecar JSON: per-column sorted differenced samples, enough to
  rebuild the empirical quantile maps when a pseudo CSV is reloaded.
* model JSON: variable order, triangular pair-copula array and the
  selection trace.
* scenario JSON: stressed labels, stress level(s), alpha grid, lag.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import stats
from scipy.special import ndtr

from .dvine import DVineModel, simulate
from .exceptions import InputError
from .marginals import MarginalEcdf, PseudoPanel, RawPanel, month_sequence

DEFAULT_SECTORS = (
    "BasicMaterials",
    "Communications",
    "ConsumerCyclical",
    "ConsumerNonCyclical",
    "Energy",
    "Financials",
    "Industrials",
    "Technology",
    "Utilities",
)

DEFAULT_ALPHA_GRID = (0.025, 0.5, 0.975)


@dataclass(frozen=True)
class GroundTruthSpec:
    """Recipe for a synthetic multi-sector PD panel.

    Exactly one of ``corr`` (Gaussian dependence) or ``vine`` (explicit
    D-vine) must be given.  ``volatility`` scales the differenced series,
    whose shape is a unit-variance Student t with ``tail_df`` degrees of
    freedom, heavy enough to exercise non-Gaussian fits.
    """

    labels: tuple[str, ...]
    rows: int
    seed: int | None = None
    corr: np.ndarray | None = None
    vine: DVineModel | None = None
    base_level: float = 0.02
    volatility: float = 0.003
    tail_df: float = 5.0
    crisis_window: tuple[int, int] | None = None
    start_month: str = "2007-01"

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(str(c) for c in self.labels))
        if len(set(self.labels)) != len(self.labels):
            raise InputError("labels must be unique")
        if self.rows < 24:
            raise InputError(f"need at least 24 rows, got {self.rows}")
        if (self.corr is None) == (self.vine is None):
            raise InputError("give exactly one of corr or vine")
        d = len(self.labels)
        if self.corr is not None:
            corr = np.asarray(self.corr, dtype=float)
            object.__setattr__(self, "corr", corr)
            if corr.shape != (d, d):
                raise InputError(f"correlation matrix must be {d}x{d}")
            if not np.allclose(corr, corr.T):
                raise InputError("correlation matrix must be symmetric")
            try:
                np.linalg.cholesky(corr)
            except np.linalg.LinAlgError as exc:
                raise InputError("correlation matrix is not positive definite") from exc
        else:
            if set(self.vine.order) != set(self.labels):
                raise InputError("vine order labels must match the panel labels")
        if self.tail_df <= 2.0:
            raise InputError("tail_df must exceed 2 for finite variance")
        if self.crisis_window is not None:
            start, end = self.crisis_window
            if not 0 <= start < end < self.rows:
                raise InputError("crisis window must satisfy 0 <= start < end < rows")

    def to_dict(self) -> dict:
        d = {
            "labels": list(self.labels),
            "rows": self.rows,
            "seed": self.seed,
            "base_level": self.base_level,
            "volatility": self.volatility,
            "tail_df": self.tail_df,
            "crisis_window": list(self.crisis_window) if self.crisis_window else None,
            "start_month": self.start_month,
        }
        if self.corr is not None:
            d["corr"] = self.corr.tolist()
        else:
            d["vine"] = self.vine.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "GroundTruthSpec":
        return cls(
            labels=tuple(d["labels"]),
            rows=int(d["rows"]),
            seed=d.get("seed"),
            corr=np.asarray(d["corr"], dtype=float) if "corr" in d else None,
            vine=DVineModel.from_dict(d["vine"]) if "vine" in d else None,
            base_level=float(d.get("base_level", 0.02)),
            volatility=float(d.get("volatility", 0.003)),
            tail_df=float(d.get("tail_df", 5.0)),
            crisis_window=tuple(d["crisis_window"]) if d.get("crisis_window") else None,
            start_month=d.get("start_month", "2007-01"),
        )


def default_spec(rows: int = 1000, seed: int | None = 20270) -> GroundTruthSpec:
    """Bundled 9-sector recipe: one-factor correlation plus a crisis spike.

    Volatility is sized so that the level random walk rarely leaves [0, 1]
    over the requested horizon; heavy clipping would distort the copula of
    the differences.
    """
    loadings = np.linspace(0.35, 0.75, len(DEFAULT_SECTORS))
    corr = np.outer(loadings, loadings)
    np.fill_diagonal(corr, 1.0)
    base = 0.05
    vol = min(0.003, 0.25 * base / np.sqrt(rows))
    return GroundTruthSpec(
        labels=DEFAULT_SECTORS,
        rows=rows,
        seed=seed,
        corr=corr,
        base_level=base,
        volatility=vol,
        crisis_window=(6, 20),
    )


def generate_panel(spec: GroundTruthSpec) -> tuple[RawPanel, dict]:
    """Build a PD-level panel whose differences follow the spec's copula.

    Returns the panel plus metadata: the seed actually used, whether it was
    randomized, and the fraction of level cells clipped into [0, 1] (a
    warning flag is set when that exceeds 1%).
    """
    rng = np.random.default_rng(spec.seed)
    d = len(spec.labels)
    n_diff = spec.rows - 1
    if spec.corr is not None:
        chol = np.linalg.cholesky(spec.corr)
        z = rng.standard_normal((n_diff, d)) @ chol.T
        u = ndtr(z)
        u = np.clip(u, 1e-12, 1.0 - 1e-12)
    else:
        u_model = simulate(spec.vine, n_diff, seed=rng)
        # vine columns follow the model order; arrange per spec labels
        pos = {lab: k for k, lab in enumerate(spec.vine.order)}
        u = np.column_stack([u_model[:, pos[lab]] for lab in spec.labels])

    t_scale = np.sqrt(spec.tail_df / (spec.tail_df - 2.0))
    diffs = spec.volatility * stats.t.ppf(u, df=spec.tail_df) / t_scale
    levels = np.empty((spec.rows, d))
    levels[0] = spec.base_level
    levels[1:] = spec.base_level + np.cumsum(diffs, axis=0)

    if spec.crisis_window is not None:
        start, end = spec.crisis_window
        peak = (start + end) // 2
        span = max(peak - start, end - peak, 1)
        t_idx = np.arange(start, end + 1)
        weight = np.clip(1.0 - np.abs(t_idx - peak) / span, 0.0, 1.0)
        # amplitude guarantees the in-window peak tops every out-of-window row
        amp = levels.max(axis=0) - levels[peak] + 0.25 * np.maximum(
            np.ptp(levels, axis=0), 1e-6
        )
        levels[start : end + 1] += weight[:, None] * amp[None, :]

    clipped = np.mean((levels < 0.0) | (levels > 1.0))
    levels = np.clip(levels, 0.0, 1.0)
    meta = {
        "seed": spec.seed,
        "randomized": spec.seed is None,
        "clipped_fraction": float(clipped),
        "clip_warning": bool(clipped > 0.01),
        "labels": list(spec.labels),
        "rows": spec.rows,
    }
    panel = RawPanel(
        dates=month_sequence(spec.start_month, spec.rows),
        labels=spec.labels,
        values=levels,
    )
    return panel, meta


# ---------------------------------------------------------------------------
# CSV / JSON file formats
# ---------------------------------------------------------------------------

_FMT = "%.17g"


def _read_table(path) -> tuple[tuple[str, ...], tuple[str, ...], np.ndarray]:
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise InputError(f"{path}: empty file") from None
        if not header or header[0].strip().lower() != "date":
            raise InputError(f"{path}: first header column must be 'date'")
        labels = tuple(h.strip() for h in header[1:])
        if not labels:
            raise InputError(f"{path}: no data columns")
        dates, rows = [], []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise InputError(
                    f"{path}: row {line_no}: expected {len(header)} fields, got {len(row)}"
                )
            dates.append(row[0].strip())
            parsed = []
            for lab, cell in zip(labels, row[1:]):
                cell = cell.strip()
                if not cell:
                    raise InputError(f"{path}: row {line_no}, column {lab}: missing value")
                try:
                    parsed.append(float(cell))
                except ValueError:
                    raise InputError(
                        f"{path}: row {line_no}, column {lab}: not a number: {cell!r}"
                    ) from None
            rows.append(parsed)
    if not rows:
        raise InputError(f"{path}: no data rows")
    return tuple(dates), labels, np.asarray(rows, dtype=float)


def _write_table(path, dates, labels, values) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["date", *labels])
        for date, row in zip(dates, np.asarray(values)):
            writer.writerow([date, *(_FMT % x for x in row)])


def read_panel(path) -> RawPanel:
    """Load a PD-level panel CSV."""
    dates, labels, values = _read_table(path)
    return RawPanel(dates=dates, labels=labels, values=values)


def write_panel(panel: RawPanel, path) -> None:
    _write_table(path, panel.dates, panel.labels, panel.values)


def marginals_path(pseudo_path) -> Path:
    return Path(pseudo_path).with_suffix(".marginals.json")


def write_pseudo(panel: PseudoPanel, path) -> None:
    """Write a pseudo-observation CSV plus its marginals sidecar."""
    dates = panel.dates or month_sequence("2000-01", panel.n_rows)
    _write_table(path, dates, panel.labels, panel.u)
    if panel.ecdfs:
        payload = {
            "labels": list(panel.labels),
            "samples": {
                lab: [float(x) for x in ecdf.sorted_values]
                for lab, ecdf in zip(panel.labels, panel.ecdfs)
            },
        }
        with marginals_path(path).open("w") as fh:
            json.dump(payload, fh)


def read_pseudo(path, *, require_marginals: bool = False) -> PseudoPanel:
    """Load a pseudo-observation CSV, picking up the marginals sidecar if present."""
    dates, labels, values = _read_table(path)
    side = marginals_path(path)
    ecdfs: tuple = ()
    if side.exists():
        with side.open() as fh:
            payload = json.load(fh)
        samples = payload.get("samples", {})
        missing = [lab for lab in labels if lab not in samples]
        if missing:
            raise InputError(f"{side}: marginal samples missing for {missing}")
        ecdfs = tuple(MarginalEcdf(samples[lab]) for lab in labels)
    elif require_marginals:
        raise InputError(
            f"{side} not found; run the transform step to produce the marginals sidecar"
        )
    try:
        return PseudoPanel(labels=labels, u=values, ecdfs=ecdfs, dates=dates)
    except InputError as exc:
        raise InputError(f"{path}: {exc}") from None


def write_model(model: DVineModel, path) -> None:
    with Path(path).open("w") as fh:
        json.dump(model.to_dict(), fh, indent=2)


def read_model(path) -> DVineModel:
    with Path(path).open() as fh:
        return DVineModel.from_dict(json.load(fh))


def write_scenario(scenario: dict, path) -> None:
    payload = {
        "stressed": list(scenario["stressed"]),
        "kappa": list(scenario["kappas"]),
        "alpha_grid": list(scenario["alpha_grid"]),
        "lag": int(scenario["lag"]),
    }
    with Path(path).open("w") as fh:
        json.dump(payload, fh, indent=2)


def read_scenario(path) -> dict:
    """Load and validate a scenario JSON into a plain dict.

    Keys: ``stressed`` (tuple of labels), ``kappas`` (tuple of levels),
    ``alpha_grid`` (tuple), ``lag`` (int).
    """
    with Path(path).open() as fh:
        raw = json.load(fh)
    stressed = raw.get("stressed")
    if not stressed or not isinstance(stressed, list):
        raise InputError(f"{path}: 'stressed' must be a nonempty list of labels")
    kappas = raw.get("kappa", [0.95, 0.99])
    if isinstance(kappas, (int, float)):
        kappas = [kappas]
    if not kappas:
        raise InputError(f"{path}: 'kappa' must contain at least one level")
    for k in kappas:
        if not 0.0 < float(k) < 1.0:
            raise InputError(f"{path}: kappa = {k} outside the (0, 1) domain")
    grid = tuple(float(a) for a in raw.get("alpha_grid", DEFAULT_ALPHA_GRID))
    if any(not 0.0 < a < 1.0 for a in grid):
        raise InputError(f"{path}: alpha grid values must lie inside (0, 1)")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise InputError(f"{path}: alpha grid must be strictly increasing")
    lag = int(raw.get("lag", 0))
    if lag < 0:
        raise InputError(f"{path}: lag must be nonnegative")
    return {
        "stressed": tuple(str(s) for s in stressed),
        "kappas": tuple(float(k) for k in kappas),
        "alpha_grid": grid,
        "lag": lag,
    }


def read_spec(path) -> GroundTruthSpec:
    with Path(path).open() as fh:
        return GroundTruthSpec.from_dict(json.load(fh))


def write_spec(spec: GroundTruthSpec, path) -> None:
    with Path(path).open("w") as fh:
        json.dump(spec.to_dict(), fh, indent=2)
