"""D-vine copula quantile regression for industry-sector stress testing.

The pipeline: difference monthly sector-PD panels, transform to the copula
scale with empirical marginals, fit D-vine quantile regressions per
response sector, pin stressed sectors at an extreme quantile level and read
off conditional quantiles of the others.  Linear quantile regression and
expectile regression are included as crossing-prone baselines.
"""

from .baselines import (
    CrossingReport,
    LinearFit,
    detect_crossings,
    expectile_loss,
    fit_expectile,
    fit_linear_quantile,
    pinball_loss,
)
from .bicop import (
    ALL_FAMILIES,
    DEFAULT_FAMILIES,
    INDEPENDENCE,
    BivariateCopula,
    CopulaFamily,
    density,
    fit_mle,
    hfunc,
    hinv,
    param_to_tau,
    select_family,
    tau_range,
    tau_to_param,
)
from .datagen import (
    DEFAULT_SECTORS,
    GroundTruthSpec,
    default_spec,
    generate_panel,
    read_model,
    read_panel,
    read_pseudo,
    read_scenario,
    read_spec,
    write_model,
    write_panel,
    write_pseudo,
    write_scenario,
    write_spec,
)
from .dvine import (
    DVineModel,
    SelectionStep,
    conditional_cdf,
    conditional_quantile,
    dvine_loglik,
    fit_dvine,
    forward_select,
    simulate,
)
from .exceptions import (
    DegenerateInputError,
    InputError,
    NumericalError,
    TauDomainError,
    VinestressError,
)
from .marginals import (
    AutocorrReport,
    DiffPanel,
    MarginalEcdf,
    PseudoPanel,
    RawPanel,
    autocorr,
    autocorr_check,
    difference,
    kendall_tau,
    kendall_tau_matrix,
    pit_inverse,
    pit_transform,
)
from .stress import (
    QuantilePrediction,
    ScenarioMatrix,
    ScenarioReport,
    StressScenario,
    lag_covariates,
    run_scenario,
    run_scenario_matrix,
)

__version__ = "0.1.0"
