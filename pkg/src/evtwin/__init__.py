"""Digital twin of a campus EV charging site: simulator, optimizers,
statistics, experiment campaigns and a live dashboard server."""

__version__ = "0.1.0"

from .config import (
    BehaviorParams,
    ChargingAreaConfig,
    PolicySet,
    ScenarioConfig,
    ScenarioError,
    load_scenario,
    save_scenario,
)
from .energy import (
    BessState,
    EnergyConfig,
    EnergyLedger,
    PvParams,
    WindParams,
    cell_temperature,
    financial_summary,
    pv_power,
    pv_power_at_cell_temp,
    step_energy,
    wind_power,
    wind_speed_at_hub,
)
from .metrics import (
    MetricSet,
    compute_metrics,
    normalize_payback,
    objective,
    satisfaction,
    self_consumption,
    self_sufficiency,
)
from .optimize import (
    Candidate,
    Dimension,
    EvalResult,
    OptimizerRunReport,
    SearchSpace,
    full_grid,
    ned,
    neighbors,
    optimize,
    space_3d,
    space_5d,
)
from .sim import DayReport, World, decide_charge, run
from .site import SiteGraph, default_site, load_site, shortest_travel_time
from .stats import (
    Factor,
    SobolReport,
    StatsError,
    WilcoxonResult,
    sobol_total_order,
    wilcoxon_signed_rank,
)
from .weather import WeatherSeries, load_weather, synth_weather
