"""Scenario engine: pin stressed sectors at a quantile level, read responses.

For every non-stressed response sector a D-vine quantile regression is fit
with the stressed sectors as covariates.  Stressed covariates are forced
into the model (ordered among themselves by forward-selection gain) so a
scenario can never silently become a no-op; predictions where the stressed
pair was fitted as Independence are flagged instead.  Each response is then
summarized by conditional quantiles at the reporting grid, by default the
median flanked by a central 95% interval, on both the copula scale and the
differenced-PD scale.

Responses are independent fit-and-predict tasks; set ``VINESTRESS_THREADS``
to evaluate them concurrently.  Results merge in panel label order either
way, so reports are deterministic.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .bicop import DEFAULT_FAMILIES, CopulaFamily
from .dvine import DVineModel, conditional_quantile, forward_select
from .exceptions import InputError
from .marginals import PseudoPanel
from .bicop import param_to_tau

DEFAULT_ALPHA_GRID = (0.025, 0.5, 0.975)


def _thread_count(threads: int | None) -> int:
    if threads is not None:
        return max(1, int(threads))
    env = os.environ.get("VINESTRESS_THREADS", "")
    try:
        return max(1, int(env)) if env else 1
    except ValueError:
        return 1


@dataclass(frozen=True)
class StressScenario:
    """Stressed sector set, stress level and reporting configuration."""

    stressed: tuple[str, ...]
    kappa: float
    alpha_grid: tuple[float, ...] = DEFAULT_ALPHA_GRID
    lag: int = 0

    def __post_init__(self):
        object.__setattr__(self, "stressed", tuple(self.stressed))
        object.__setattr__(self, "alpha_grid", tuple(float(a) for a in self.alpha_grid))
        if not self.stressed:
            raise InputError("scenario needs at least one stressed sector")
        if len(set(self.stressed)) != len(self.stressed):
            raise InputError("stressed labels must be unique")
        if not 0.0 < self.kappa < 1.0:
            raise InputError(f"kappa = {self.kappa} outside the (0, 1) domain")
        grid = self.alpha_grid
        if any(not 0.0 < a < 1.0 for a in grid):
            raise InputError("alpha grid values must lie inside (0, 1)")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise InputError("alpha grid must be strictly increasing")
        if self.lag < 0:
            raise InputError("lag must be nonnegative")


@dataclass(frozen=True)
class QuantilePrediction:
    """Conditional quantiles of one response under one stress level."""

    response: str
    kappa: float
    alphas: tuple[float, ...]
    q_copula: np.ndarray
    q_scale: np.ndarray | None
    families_on_path: tuple[str, ...]
    independent_stressed: tuple[str, ...]
    model: DVineModel = field(repr=False)

    def __post_init__(self):
        q = np.asarray(self.q_copula, dtype=float)
        object.__setattr__(self, "q_copula", q)
        if self.q_scale is not None:
            object.__setattr__(self, "q_scale", np.asarray(self.q_scale, dtype=float))
        if q.shape != (len(self.alphas),):
            raise InputError("one copula-scale quantile per alpha expected")
        if np.any(np.diff(q) < 0.0):
            raise InputError("copula-scale quantiles must be nondecreasing in alpha")

    @property
    def median_copula(self) -> float:
        try:
            idx = self.alphas.index(0.5)
        except ValueError:
            idx = len(self.alphas) // 2
        return float(self.q_copula[idx])


@dataclass(frozen=True)
class ScenarioReport:
    """Predictions for every response of one scenario, in panel order."""

    scenario: StressScenario
    predictions: tuple[QuantilePrediction, ...]
    skipped: tuple[tuple[str, str], ...] = ()
    n_rows: int = 0

    def prediction(self, response: str) -> QuantilePrediction:
        for p in self.predictions:
            if p.response == response:
                return p
        raise InputError(f"no prediction for response {response!r}")


@dataclass(frozen=True)
class ScenarioMatrix:
    """One stressed set evaluated at several stress levels."""

    stressed: tuple[str, ...]
    kappas: tuple[float, ...]
    alpha_grid: tuple[float, ...]
    lag: int
    reports: tuple[ScenarioReport, ...]
    monotone_in_kappa: dict = field(default_factory=dict)

    def prediction(self, response: str, kappa: float) -> QuantilePrediction:
        for rep in self.reports:
            if rep.scenario.kappa == kappa:
                return rep.prediction(response)
        raise InputError(f"no report for kappa = {kappa}")

    def rows(self):
        """Tidy rows (response, kappa, alpha, q_copula, q_scale, families)."""
        for rep in self.reports:
            for pred in rep.predictions:
                for k, alpha in enumerate(pred.alphas):
                    yield {
                        "response": pred.response,
                        "kappa": rep.scenario.kappa,
                        "alpha": alpha,
                        "q_copula": float(pred.q_copula[k]),
                        "q_pd_scale": (
                            float(pred.q_scale[k]) if pred.q_scale is not None else None
                        ),
                        "families_on_path": "|".join(pred.families_on_path),
                    }


def lag_covariates(panel: PseudoPanel, covariates, lag: int) -> PseudoPanel:
    """Shift covariate columns back by ``lag`` months against the rest.

    Row ``t`` of the result pairs each non-covariate (response) value at
    time ``t + lag`` with covariate values at time ``t``; ``lag`` rows are
    lost.  ``lag = 0`` returns the panel unchanged.
    """
    if lag < 0:
        raise InputError("lag must be nonnegative")
    if lag == 0:
        return panel
    n = panel.n_rows
    if lag >= n:
        raise InputError(f"lag {lag} too large for {n} rows")
    covariates = tuple(covariates)
    for lab in covariates:
        panel.index(lab)  # raises for unknown labels
    cols = []
    for j, lab in enumerate(panel.labels):
        col = panel.u[:, j]
        cols.append(col[:-lag] if lab in covariates else col[lag:])
    dates = panel.dates[lag:] if panel.dates else None
    return PseudoPanel(
        labels=panel.labels, u=np.column_stack(cols), ecdfs=panel.ecdfs, dates=dates
    )


def _fit_response(
    work: PseudoPanel,
    response: str,
    stressed,
    families,
    force: bool,
    indep_test: bool,
) -> DVineModel:
    candidates = {lab: work.column(lab) for lab in stressed}
    return forward_select(
        work.column(response),
        candidates,
        response_label=response,
        families=families,
        force_all=force,
        indep_test=indep_test,
    )


def _predict(
    model: DVineModel,
    panel: PseudoPanel,
    response: str,
    kappa: float,
    alpha_grid,
) -> QuantilePrediction:
    d = model.dim - 1
    alphas = np.asarray(alpha_grid, dtype=float)
    if d == 0:
        q = alphas.copy()
    else:
        u = np.full((1, d), kappa)
        q = np.asarray(
            [conditional_quantile(model, float(a), u) for a in alphas], dtype=float
        ).ravel()
    q_scale = None
    if panel.ecdfs:
        q_scale = panel.ecdf(response).quantile(q)
    path = model.response_path()
    indep = tuple(
        lab
        for lab, cop in zip(model.covariates, path)
        if cop.family is CopulaFamily.INDEPENDENCE
    )
    return QuantilePrediction(
        response=response,
        kappa=kappa,
        alphas=tuple(float(a) for a in alphas),
        q_copula=q,
        q_scale=q_scale,
        families_on_path=tuple(cop.family.value for cop in path),
        independent_stressed=indep,
        model=model,
    )


def run_scenario(
    panel: PseudoPanel,
    scenario: StressScenario,
    *,
    families=DEFAULT_FAMILIES,
    force: bool = True,
    indep_test: bool = True,
    threads: int | None = None,
) -> ScenarioReport:
    """Fit and evaluate every non-stressed response under one scenario."""
    matrix = run_scenario_matrix(
        panel,
        scenario.stressed,
        [scenario.kappa],
        alpha_grid=scenario.alpha_grid,
        lag=scenario.lag,
        families=families,
        force=force,
        indep_test=indep_test,
        threads=threads,
    )
    return matrix.reports[0]


def run_scenario_matrix(
    panel: PseudoPanel,
    stressed,
    kappas,
    *,
    alpha_grid=DEFAULT_ALPHA_GRID,
    lag: int = 0,
    families=DEFAULT_FAMILIES,
    force: bool = True,
    indep_test: bool = True,
    threads: int | None = None,
) -> ScenarioMatrix:
    """Evaluate one stressed set at several stress levels.

    Models do not depend on the stress level, so each response is fit once
    and evaluated per kappa.  For responses whose response-path pairs are
    all nonnegatively dependent, the conditional medians are checked to be
    nondecreasing in kappa and the outcome recorded per response.
    """
    kappas = tuple(float(k) for k in kappas)
    if not kappas:
        raise InputError("kappa list must not be empty")
    stressed = tuple(stressed)
    # validates kappa/grid/lag and the stressed set
    base = StressScenario(stressed=stressed, kappa=kappas[0], alpha_grid=alpha_grid, lag=lag)
    missing = [lab for lab in stressed if lab not in panel.labels]
    if missing:
        raise InputError(f"unknown stressed sector label(s): {', '.join(missing)}")
    responses = [lab for lab in panel.labels if lab not in stressed]
    if not responses:
        raise InputError("no response sectors left after stressing")
    work = lag_covariates(panel, stressed, lag)
    if work.n_rows < 10:
        raise InputError(f"only {work.n_rows} aligned rows after lagging; need >= 10")

    usable = []
    skipped = []
    for resp in responses:
        if np.ptp(work.column(resp)) == 0.0:
            skipped.append((resp, "degenerate response column"))
        else:
            usable.append(resp)

    def job(resp):
        return _fit_response(work, resp, stressed, families, force, indep_test)

    n_threads = _thread_count(threads)
    if n_threads > 1 and len(usable) > 1:
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            models = list(pool.map(job, usable))
    else:
        models = [job(resp) for resp in usable]
    model_by_resp = dict(zip(usable, models))

    reports = []
    for kappa in kappas:
        preds = tuple(
            _predict(model_by_resp[resp], panel, resp, kappa, alpha_grid)
            for resp in usable
        )
        reports.append(
            ScenarioReport(
                scenario=StressScenario(stressed, kappa, tuple(alpha_grid), lag),
                predictions=preds,
                skipped=tuple(skipped),
                n_rows=work.n_rows,
            )
        )

    monotone = {}
    if len(kappas) > 1:
        order = np.argsort(kappas)
        for resp in usable:
            path = model_by_resp[resp].response_path()
            if not all(param_to_tau(cop) >= 0.0 for cop in path):
                monotone[resp] = "not-checked (negative dependence on path)"
                continue
            medians = [reports[k].prediction(resp).median_copula for k in order]
            ok = all(b >= a - 1e-12 for a, b in zip(medians, medians[1:]))
            monotone[resp] = "ok" if ok else "violated"

    return ScenarioMatrix(
        stressed=stressed,
        kappas=kappas,
        alpha_grid=tuple(float(a) for a in alpha_grid),
        lag=lag,
        reports=tuple(reports),
        monotone_in_kappa=monotone,
    )
