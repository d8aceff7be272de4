"""D-vine copula models with the response as first variable.

A model on variables ``(l_0, l_1, ..., l_{m-1})`` (response first) stores one
pair-copula per edge ``(i, j | i+1, ..., j-1)``.  All evaluation walks the
same recursion on contiguous index blocks: with ``F[i,j]`` the conditional
CDF of variable ``i`` given the block ``i+1..j`` and ``B[i,j]`` that of
variable ``j`` given ``i..j-1``,

    F[i,j] = h_{1|2}( F[i,j-1] | B[i+1,j] )      (pair copula of edge (i,j))
    B[i,j] = h_{2|1}( B[i+1,j] | F[i,j-1] )

The conditional CDF of the response given all covariates is ``F[0,m-1]``;
its quantile function inverts the first-edge h-functions top-down, which
keeps predicted quantiles monotone in the level by construction.

Fitting is sequential: the pair of a block is selected on the conditional
values of the block's own sub-blocks.  Results are memoized per ordered
label block, so forward selection shares work across candidate orderings.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bicop import DEFAULT_FAMILIES, BivariateCopula, CopulaFamily, select_family
from .exceptions import InputError
from .marginals import PseudoPanel, clamp_unit


@dataclass(frozen=True)
class SelectionStep:
    """One adopted step of forward covariate selection."""

    label: str
    position: int
    cond_loglik: float
    aic: float
    improved: bool
    forced: bool = False

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "position": self.position,
            "cond_loglik": self.cond_loglik,
            "aic": self.aic,
            "improved": self.improved,
            "forced": self.forced,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SelectionStep":
        return cls(
            label=d["label"],
            position=int(d["position"]),
            cond_loglik=float(d["cond_loglik"]),
            aic=float(d["aic"]),
            improved=bool(d["improved"]),
            forced=bool(d.get("forced", False)),
        )


@dataclass(frozen=True)
class DVineModel:
    """Ordered variable labels plus the triangular pair-copula array.

    ``pairs[t-1][i]`` is the copula of edge ``(i, i+t)`` in tree ``t``; tree
    ``t`` has ``m - t`` edges, for ``m d(d+1)/2`` pairs in total with ``d``
    covariates.
    """

    order: tuple[str, ...]
    pairs: tuple[tuple[BivariateCopula, ...], ...]
    cond_loglik: float | None = None
    nobs: int | None = None
    trace: tuple[SelectionStep, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "order", tuple(self.order))
        object.__setattr__(self, "pairs", tuple(tuple(row) for row in self.pairs))
        object.__setattr__(self, "trace", tuple(self.trace))
        m = len(self.order)
        if m < 1:
            raise InputError("model needs at least the response variable")
        if len(set(self.order)) != m:
            raise InputError("variable labels must be unique")
        if len(self.pairs) != m - 1:
            raise InputError(f"expected {m - 1} trees, got {len(self.pairs)}")
        for t, row in enumerate(self.pairs, start=1):
            if len(row) != m - t:
                raise InputError(f"tree {t} must have {m - t} edges, got {len(row)}")

    @property
    def dim(self) -> int:
        return len(self.order)

    @property
    def response(self) -> str:
        return self.order[0]

    @property
    def covariates(self) -> tuple[str, ...]:
        return self.order[1:]

    def pair(self, i: int, j: int) -> BivariateCopula:
        """Copula of edge ``(i, j | i+1..j-1)`` by variable positions."""
        if not 0 <= i < j < self.dim:
            raise InputError(f"no edge ({i}, {j}) in a {self.dim}-variable model")
        return self.pairs[j - i - 1][i]

    def response_path(self) -> tuple[BivariateCopula, ...]:
        """Pairs linking the response to each covariate, in tree order."""
        return tuple(self.pairs[j - 1][0] for j in range(1, self.dim))

    def to_dict(self) -> dict:
        return {
            "order": list(self.order),
            "pairs": [[cop.to_dict() for cop in row] for row in self.pairs],
            "cond_loglik": self.cond_loglik,
            "n": self.nobs,
            "trace": [step.to_dict() for step in self.trace],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DVineModel":
        return cls(
            order=tuple(d["order"]),
            pairs=tuple(
                tuple(BivariateCopula.from_dict(c) for c in row) for row in d["pairs"]
            ),
            cond_loglik=d.get("cond_loglik"),
            nobs=d.get("n"),
            trace=tuple(SelectionStep.from_dict(s) for s in d.get("trace", [])),
        )


def _coerce_matrix(model: DVineModel, u) -> np.ndarray:
    if isinstance(u, PseudoPanel):
        cols = [u.column(lab) for lab in model.order]
        return np.column_stack(cols)
    arr = np.asarray(u, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != model.dim:
        raise InputError(
            f"expected {model.dim} columns matching the model order, got shape {arr.shape}"
        )
    return arr


def _coerce_covariates(model: DVineModel, u) -> np.ndarray:
    d = model.dim - 1
    arr = np.asarray(u, dtype=float)
    if d == 0:
        if arr.size not in (0,):
            raise InputError("model has no covariates")
        return np.zeros((1, 0))
    if arr.ndim == 1:
        if arr.shape[0] != d:
            raise InputError(f"expected {d} covariate values, got {arr.shape[0]}")
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != d:
        raise InputError(f"expected {d} covariate columns, got shape {arr.shape}")
    return clamp_unit(arr)


def _covariate_blocks(model: DVineModel, cov: np.ndarray) -> dict:
    """Backward conditional arrays over covariate positions ``1..m-1``."""
    m = model.dim
    F: dict = {}
    B: dict = {}
    for i in range(1, m):
        F[(i, i)] = B[(i, i)] = cov[:, i - 1]
    for t in range(1, m - 1):
        for i in range(1, m - t):
            j = i + t
            cop = model.pairs[t - 1][i]
            a, b = F[(i, j - 1)], B[(i + 1, j)]
            F[(i, j)] = cop.hfunc(1, a, b)
            B[(i, j)] = cop.hfunc(2, a, b)
    return B


def dvine_loglik(model: DVineModel, u) -> float:
    """Joint copula log-likelihood: the sum of all pair log-densities."""
    U = clamp_unit(_coerce_matrix(model, u))
    m = model.dim
    F: dict = {}
    B: dict = {}
    for i in range(m):
        F[(i, i)] = B[(i, i)] = U[:, i]
    total = 0.0
    for t in range(1, m):
        for i in range(m - t):
            j = i + t
            cop = model.pairs[t - 1][i]
            a, b = F[(i, j - 1)], B[(i + 1, j)]
            total += float(np.sum(cop.log_density(a, b)))
            F[(i, j)] = cop.hfunc(1, a, b)
            B[(i, j)] = cop.hfunc(2, a, b)
    return total


def conditional_cdf(model: DVineModel, v, u):
    """CDF of the response at ``v`` given covariate values ``u`` (model order)."""
    cov = _coerce_covariates(model, u)
    v_arr = clamp_unit(np.asarray(v, dtype=float))
    scalar = v_arr.ndim == 0 and cov.shape[0] == 1
    out = np.broadcast_arrays(np.atleast_1d(v_arr), np.zeros(cov.shape[0]))[0].astype(float)
    if model.dim == 1:
        return float(out[0]) if scalar else out
    B = _covariate_blocks(model, cov)
    a = out
    for j in range(1, model.dim):
        a = model.pairs[j - 1][0].hfunc(1, a, B[(1, j)])
    return float(a[0]) if scalar else a


def conditional_quantile(model: DVineModel, alpha, u):
    """Quantile of the response at level ``alpha`` given covariates ``u``.

    Evaluated by chaining inverse h-functions down the response path; exact
    inverse of :func:`conditional_cdf`, hence monotone in ``alpha``.
    """
    cov = _coerce_covariates(model, u)
    a_arr = np.asarray(alpha, dtype=float)
    if np.any(a_arr <= 0.0) or np.any(a_arr >= 1.0):
        raise InputError("quantile level must lie strictly inside (0, 1)")
    scalar = a_arr.ndim == 0 and cov.shape[0] == 1
    p = np.broadcast_arrays(np.atleast_1d(clamp_unit(a_arr)), np.zeros(cov.shape[0]))[0].astype(float)
    if model.dim == 1:
        return float(p[0]) if scalar else p
    B = _covariate_blocks(model, cov)
    for j in range(model.dim - 1, 0, -1):
        p = model.pairs[j - 1][0].hinv(1, p, B[(1, j)])
    return float(p[0]) if scalar else p


def simulate(model: DVineModel, n: int, seed=None) -> np.ndarray:
    """Draw ``n`` rows from the model copula by inverse Rosenblatt transform.

    Deterministic given ``seed`` (PCG64 via ``numpy.random.default_rng``).
    Columns follow ``model.order``.
    """
    if n < 1:
        raise InputError("need n >= 1 draws")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    m = model.dim
    W = clamp_unit(rng.uniform(size=(n, m)))
    U = np.empty((n, m))
    U[:, 0] = W[:, 0]
    F: dict = {}
    B: dict = {}
    F[(0, 0)] = B[(0, 0)] = U[:, 0]
    for j in range(1, m):
        b = W[:, j]
        for i in range(j):
            b = model.pairs[j - i - 1][i].hinv(2, b, F[(i, j - 1)])
        U[:, j] = b
        F[(j, j)] = B[(j, j)] = U[:, j]
        for i in range(j - 1, -1, -1):
            cop = model.pairs[j - i - 1][i]
            a, bb = F[(i, j - 1)], B[(i + 1, j)]
            F[(i, j)] = cop.hfunc(1, a, bb)
            B[(i, j)] = cop.hfunc(2, a, bb)
    return U


class _FitEngine:
    """Sequential pair fitting memoized on ordered label blocks.

    The conditional arrays of a block depend only on the block's own ordered
    labels, so fits are shared between candidate orderings that contain the
    same contiguous block.
    """

    def __init__(self, columns: dict, families=DEFAULT_FAMILIES, indep_test: bool = True):
        if not columns:
            raise InputError("no data columns supplied")
        sizes = {np.asarray(c).shape[0] for c in columns.values()}
        if len(sizes) != 1:
            raise InputError("all columns must have equal length")
        self.nobs = sizes.pop()
        self._cols = {
            lab: clamp_unit(np.asarray(col, dtype=float).ravel())
            for lab, col in columns.items()
        }
        self.families = families
        self.indep_test = indep_test
        self._F: dict = {}
        self._B: dict = {}
        self._cop: dict = {}

    def _ensure(self, block: tuple):
        if block in self._F:
            return
        if len(block) == 1:
            self._F[block] = self._B[block] = self._cols[block[0]]
            return
        left, right = block[:-1], block[1:]
        self._ensure(left)
        self._ensure(right)
        a, b = self._F[left], self._B[right]
        cop = select_family(a, b, self.families, indep_test=self.indep_test)
        self._cop[block] = cop
        self._F[block] = cop.hfunc(1, a, b)
        self._B[block] = cop.hfunc(2, a, b)

    def pair(self, block) -> BivariateCopula:
        block = tuple(block)
        self._ensure(block)
        return self._cop[block]

    def cond_loglik(self, order) -> float:
        """Log-likelihood of the response-path pairs for the given order."""
        order = tuple(order)
        return sum(self.pair(order[: j + 1]).loglik for j in range(1, len(order)))

    def cond_nparams(self, order) -> int:
        order = tuple(order)
        return sum(self.pair(order[: j + 1]).n_params for j in range(1, len(order)))

    def build_model(self, order, trace=()) -> DVineModel:
        order = tuple(order)
        m = len(order)
        pairs = tuple(
            tuple(self.pair(order[i : i + t + 1]) for i in range(m - t))
            for t in range(1, m)
        )
        return DVineModel(
            order=order,
            pairs=pairs,
            cond_loglik=self.cond_loglik(order),
            nobs=self.nobs,
            trace=tuple(trace),
        )


def fit_dvine(
    columns: dict,
    order,
    *,
    families=DEFAULT_FAMILIES,
    indep_test: bool = True,
) -> DVineModel:
    """Fit all pair-copulas of a D-vine with a fixed variable order."""
    order = tuple(order)
    missing = [lab for lab in order if lab not in columns]
    if missing:
        raise InputError(f"columns missing for labels {missing}")
    engine = _FitEngine({lab: columns[lab] for lab in order}, families, indep_test)
    return engine.build_model(order)


def forward_select(
    response,
    candidates: dict,
    *,
    response_label: str = "response",
    families=DEFAULT_FAMILIES,
    indep_test: bool = True,
    force_all: bool = False,
    max_covariates: int | None = None,
) -> DVineModel:
    """Greedy covariate selection for D-vine quantile regression.

    Each step tries every unused candidate at every insertion position in
    the covariate subsequence (response stays first), scores the resulting
    order by the AIC of the response-path conditional log-likelihood, and
    adopts the best order if it improves on the current AIC.  Selection
    stops when no candidate improves; with ``force_all`` every candidate is
    eventually adopted (best-first), which orders a forced covariate set by
    selection gain.
    """
    response = np.asarray(response, dtype=float).ravel()
    if response.shape[0] < 10:
        raise InputError("need at least 10 rows for selection")
    if not candidates:
        raise InputError("need at least 1 candidate covariate")
    if response_label in candidates:
        raise InputError(f"candidate labels must not include {response_label!r}")
    columns = {response_label: response}
    for lab, col in candidates.items():
        columns[str(lab)] = np.asarray(col, dtype=float).ravel()
    engine = _FitEngine(columns, families, indep_test)

    order = [response_label]
    current_aic = 0.0
    remaining = [str(lab) for lab in candidates]
    trace: list[SelectionStep] = []
    limit = len(remaining) if max_covariates is None else min(max_covariates, len(remaining))

    while remaining and len(order) - 1 < limit:
        best = None
        for lab in remaining:
            for pos in range(1, len(order) + 1):
                cand_order = order[:pos] + [lab] + order[pos:]
                ll = engine.cond_loglik(cand_order)
                aic = -2.0 * ll + 2.0 * engine.cond_nparams(cand_order)
                if best is None or aic < best[0]:
                    best = (aic, ll, lab, pos, cand_order)
        aic, ll, lab, pos, cand_order = best
        improved = aic < current_aic - 1e-9
        if not improved and not force_all:
            break
        order = cand_order
        current_aic = aic
        remaining.remove(lab)
        trace.append(
            SelectionStep(
                label=lab,
                position=pos,
                cond_loglik=ll,
                aic=aic,
                improved=improved,
                forced=not improved,
            )
        )

    return engine.build_model(order, trace=trace)
