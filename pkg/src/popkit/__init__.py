"""popkit: simulation and verification toolkit for stochastic population
models — birth-death jump chains, branching and Wright-Fisher diffusions,
their scaling limits and interrelations, and deterministic genetic-load
accounting."""

from .analysis import (
    EmpiricalSample,
    McSummary,
    bootstrap_ci,
    empirical_weights,
    ks_critical_value,
    ks_distance,
    mc_summary,
    tv_distance,
)
from .diffusions import (
    FellerSpec,
    LogisticFellerSpec,
    LotkaVolterraSpec,
    WrightFisherSpec,
    feller_extinction,
    feller_extinction_limit,
    feller_laplace,
    feller_transition_cdf,
    sample_feller_exact,
    sample_wf_terminal,
    simulate_feller_em,
    simulate_feller_exact,
    simulate_logistic_feller,
    simulate_lv,
    simulate_ou,
    simulate_wf,
    wf_occupancy_sample,
    wf_stationary_cdf,
    wf_stationary_density,
)
from .experiments import REGISTRY, ExperimentResult, run_experiment
from .load import (
    LoadScenario,
    RegulationFn,
    absolute_loss,
    beverton_holt,
    frequency_series,
    haldane_load,
    immigration_rescue,
    load_artifact_search,
    multilocus_load,
    regulated_trajectories,
    total_a_ever_born,
    unregulated_trajectories,
)
from .markov_jump import (
    BirthDeathSpec,
    ExplosionSuspectedError,
    IntegerDistribution,
    SamplePath,
    TruncationError,
    classify_honesty,
    jensen_gap,
    linear_bd,
    logistic_bd,
    logistic_ode,
    moment_trajectory,
    pure_birth_law,
    pure_death_law,
    sample_bd_terminal,
    sample_linear_bd_terminal_exact,
    simulate_bd,
    solve_kfe,
)
from .relations import (
    ConditioningFailedError,
    TimeChangeDegenerateError,
    conditioned_frequency,
    conditioned_terminal_coupled,
    sample_time_changed_terminal,
    time_changed_frequency,
)
from .scaling import (
    LadderReport,
    LimitLadder,
    OffspringPGF,
    critical_geometric_pgf,
    gw_to_feller_check,
    lln_check,
    nearly_critical_check,
    pgf_iterate,
    sample_wf_chain_terminal,
    simulate_wf_chain,
    strong_mutation_check,
    weak_mutation_check,
)
from .streams import StreamKey, derive_stream

__version__ = "0.1.0"
