"""Scenario configuration: schema, defaults, validation and (de)serialization.

One JSON file describes one reproducible run. ``load_scenario`` applies
defaults, then validates every invariant and reports *all* violations at
once. Constructing the dataclasses directly skips the load-boundary range
checks, which the engine itself does not need (e.g. synthetic worlds with
zero vehicles in tests).

Battery capacities per model are defaults, not manufacturer data; the same
goes for every price in :mod:`evtwin.energy`.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

from .energy import EnergyConfig, PvParams, WindParams

SCHEMA_VERSION = 1

EV_MODELS = ("VFe34", "VF8", "VF9")
DEFAULT_BATTERY_KWH = {"VFe34": 42.0, "VF8": 88.0, "VF9": 92.0}


class ScenarioError(ValueError):
    """Validation failure; ``violations`` lists every broken invariant."""

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


@dataclass(frozen=True)
class ChargingAreaConfig:
    area_id: str
    n_ports_11kw: int
    n_ports_30kw: int
    n_inactive_slots: int = 100

    def validate(self) -> list[str]:
        errs = []
        if not 0 <= self.n_ports_11kw <= 50:
            errs.append(
                f"areas[{self.area_id}].n_ports_11kw must be in [0, 50], got {self.n_ports_11kw}"
            )
        if not 0 <= self.n_ports_30kw <= 10:
            errs.append(
                f"areas[{self.area_id}].n_ports_30kw must be in [0, 10], got {self.n_ports_30kw}"
            )
        if self.n_inactive_slots < 0:
            errs.append(
                f"areas[{self.area_id}].n_inactive_slots must be >= 0, got {self.n_inactive_slots}"
            )
        return errs


@dataclass(frozen=True)
class PolicySet:
    ban_gasoline: bool = False
    idle_fee: bool = False
    idle_fee_rate_vnd_per_min: int = 1000
    idle_grace_minutes: int = 30
    relocate_full: bool = False
    notification: bool = False
    idle_comply_prob_per_check: float = 0.25

    def validate(self) -> list[str]:
        errs = []
        if self.idle_fee_rate_vnd_per_min < 0:
            errs.append("policies.idle_fee_rate_vnd_per_min must be >= 0")
        if self.idle_grace_minutes < 0:
            errs.append("policies.idle_grace_minutes must be >= 0")
        if not 0.0 <= self.idle_comply_prob_per_check <= 1.0:
            errs.append("policies.idle_comply_prob_per_check must be in [0, 1]")
        return errs


@dataclass(frozen=True)
class BehaviorParams:
    soc_low_threshold: float = 35.0
    soc_high_threshold: float = 70.0
    mid_charge_prob: float = 0.5
    arrival_soc_range: tuple[float, float] = (20.0, 90.0)
    start_work_windows: tuple[tuple[float, float], ...] = ((8.0, 9.0), (12.0, 14.0))
    end_work_window: tuple[float, float] = (17.0, 19.0)
    priority_fast_prob: float = 0.3
    priority_des_prob: float = 0.3
    battery_capacity_by_model: dict = field(
        default_factory=lambda: dict(DEFAULT_BATTERY_KWH)
    )
    model_mix: dict = field(
        default_factory=lambda: {m: 1.0 / len(EV_MODELS) for m in EV_MODELS}
    )

    def validate(self) -> list[str]:
        errs = []
        if not 0.0 <= self.soc_low_threshold < self.soc_high_threshold <= 100.0:
            errs.append(
                "behavior thresholds must satisfy 0 <= low < high <= 100, got "
                f"{self.soc_low_threshold}, {self.soc_high_threshold}"
            )
        lo, hi = self.arrival_soc_range
        if not (0.0 <= lo <= hi <= 100.0):
            errs.append(f"behavior.arrival_soc_range must lie within [0, 100], got [{lo}, {hi}]")
        for w in (*self.start_work_windows, self.end_work_window):
            if not (0.0 <= w[0] <= w[1] < 24.0):
                errs.append(f"behavior work window {list(w)} must lie within [0, 24)")
        for name in ("mid_charge_prob", "priority_fast_prob", "priority_des_prob"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                errs.append(f"behavior.{name} must be in [0, 1], got {v}")
        for model in self.model_mix:
            if model not in self.battery_capacity_by_model:
                errs.append(f"behavior.model_mix names unknown EV model {model!r}")
        for model, cap in self.battery_capacity_by_model.items():
            if cap <= 0:
                errs.append(f"behavior.battery_capacity_by_model[{model}] must be > 0")
        if self.model_mix:
            total = sum(self.model_mix.values())
            if abs(total - 1.0) > 1e-9:
                errs.append(f"behavior.model_mix probabilities must sum to 1, got {total}")
        return errs


@dataclass(frozen=True)
class ScenarioConfig:
    nb_electrical: int = 50
    nb_gasoline: int = 30
    areas: tuple[ChargingAreaConfig, ...] = ()
    energy: EnergyConfig = field(default_factory=EnergyConfig)
    policies: PolicySet = field(default_factory=PolicySet)
    behavior: BehaviorParams = field(default_factory=BehaviorParams)
    horizon_days: int = 1
    timestep_minutes: int = 5
    rng_seed: int = 0
    weather_ref: str = "synthetic:q3"
    site_ref: str | None = None
    strict_completion: bool = False   # satisfied = reached 100% rather than started
    commute_soc_drain: bool = False

    def validate(self) -> list[str]:
        errs = []
        if not 30 <= self.nb_electrical <= 200:
            errs.append(f"nb_electrical must be in [30, 200], got {self.nb_electrical}")
        if self.nb_gasoline < 0:
            errs.append(f"nb_gasoline must be >= 0, got {self.nb_gasoline}")
        if not self.areas:
            errs.append("at least one charging area is required")
        seen = set()
        for a in self.areas:
            if a.area_id in seen:
                errs.append(f"duplicate area_id {a.area_id!r}")
            seen.add(a.area_id)
            errs.extend(a.validate())
        if self.horizon_days < 1:
            errs.append(f"horizon_days must be >= 1, got {self.horizon_days}")
        if self.timestep_minutes != 5:
            errs.append(f"timestep_minutes is fixed at 5, got {self.timestep_minutes}")
        if not 0 <= self.rng_seed < 2**64:
            errs.append("rng_seed must be an unsigned 64-bit integer")
        errs.extend(self.energy.validate())
        errs.extend(self.policies.validate())
        errs.extend(self.behavior.validate())
        errs.extend(self._check_weather_ref())
        return errs

    def _check_weather_ref(self) -> list[str]:
        ref = self.weather_ref
        if ref.startswith("synthetic:"):
            tail = ref.split(":", 1)[1]
            if tail not in ("q1", "q2", "q3", "q4"):
                return [f"weather_ref synthetic profile must be q1..q4, got {ref!r}"]
        return []

    def with_policies(self, policies: PolicySet) -> "ScenarioConfig":
        return replace(self, policies=policies)

    def to_dict(self) -> dict:
        d = {
            "schema_version": SCHEMA_VERSION,
            "nb_electrical": self.nb_electrical,
            "nb_gasoline": self.nb_gasoline,
            "horizon_days": self.horizon_days,
            "timestep_minutes": self.timestep_minutes,
            "rng_seed": self.rng_seed,
            "weather_ref": self.weather_ref,
            "site_ref": self.site_ref,
            "strict_completion": self.strict_completion,
            "commute_soc_drain": self.commute_soc_drain,
            "areas": [
                {
                    "area_id": a.area_id,
                    "n_ports_11kw": a.n_ports_11kw,
                    "n_ports_30kw": a.n_ports_30kw,
                    "n_inactive_slots": a.n_inactive_slots,
                }
                for a in self.areas
            ],
            "energy": {
                "pv": asdict(self.energy.pv),
                "wind": asdict(self.energy.wind),
                "bess_capacity_kwh": self.energy.bess_capacity_kwh,
                "bess_initial_soc_kwh": self.energy.bess_initial_soc_kwh,
                "bess_charge_eff": self.energy.bess_charge_eff,
                "bess_discharge_eff": self.energy.bess_discharge_eff,
                "bess_unit_cost_vnd": self.energy.bess_unit_cost_vnd,
                "grid_tariff_vnd_per_kwh": self.energy.grid_tariff_vnd_per_kwh,
                "charger_efficiency": self.energy.charger_efficiency,
            },
            "policies": asdict(self.policies),
            "behavior": {
                "soc_low_threshold": self.behavior.soc_low_threshold,
                "soc_high_threshold": self.behavior.soc_high_threshold,
                "mid_charge_prob": self.behavior.mid_charge_prob,
                "arrival_soc_range": list(self.behavior.arrival_soc_range),
                "start_work_windows": [list(w) for w in self.behavior.start_work_windows],
                "end_work_window": list(self.behavior.end_work_window),
                "priority_fast_prob": self.behavior.priority_fast_prob,
                "priority_des_prob": self.behavior.priority_des_prob,
                "battery_capacity_by_model": dict(self.behavior.battery_capacity_by_model),
                "model_mix": dict(self.behavior.model_mix),
            },
        }
        return d

    def scenario_hash(self) -> str:
        """Stable 16-hex digest of the canonical config serialization."""
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _build(section: dict, cls, prefix: str, errs: list[str], **coerce):
    """Construct a dataclass from a dict, flagging unknown keys."""
    fields = {f for f in cls.__dataclass_fields__}
    clean = {}
    for key, val in section.items():
        if key not in fields:
            errs.append(f"unknown field {prefix}{key}")
            continue
        clean[key] = coerce[key](val) if key in coerce else val
    return cls(**clean)


def scenario_from_dict(raw: dict) -> ScenarioConfig:
    """Build and validate a ScenarioConfig from parsed JSON."""
    errs: list[str] = []
    if not isinstance(raw, dict):
        raise ScenarioError(["scenario file must contain a JSON object"])
    version = raw.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ScenarioError([f"unsupported schema_version {version}, expected {SCHEMA_VERSION}"])

    areas = []
    for i, a in enumerate(raw.get("areas", [])):
        if "area_id" not in a:
            errs.append(f"areas[{i}] missing area_id")
            continue
        areas.append(_build(a, ChargingAreaConfig, f"areas[{i}].", errs))

    energy_raw = dict(raw.get("energy", {}))
    pv = _build(energy_raw.pop("pv", {}), PvParams, "energy.pv.", errs)
    wind = _build(energy_raw.pop("wind", {}), WindParams, "energy.wind.", errs)
    energy = _build(
        {"pv": pv, "wind": wind, **energy_raw}, EnergyConfig, "energy.", errs
    )

    policies = _build(raw.get("policies", {}), PolicySet, "policies.", errs)
    behavior = _build(
        raw.get("behavior", {}),
        BehaviorParams,
        "behavior.",
        errs,
        arrival_soc_range=lambda v: tuple(v),
        start_work_windows=lambda v: tuple(tuple(w) for w in v),
        end_work_window=lambda v: tuple(v),
    )

    top = {
        k: raw[k]
        for k in (
            "nb_electrical",
            "nb_gasoline",
            "horizon_days",
            "timestep_minutes",
            "rng_seed",
            "weather_ref",
            "site_ref",
            "strict_completion",
            "commute_soc_drain",
        )
        if k in raw
    }
    known = set(top) | {"schema_version", "areas", "energy", "policies", "behavior"}
    for key in raw:
        if key not in known:
            errs.append(f"unknown field {key}")

    cfg = ScenarioConfig(
        areas=tuple(areas), energy=energy, policies=policies, behavior=behavior, **top
    )
    errs.extend(cfg.validate())
    if errs:
        raise ScenarioError(errs)
    return cfg


def load_scenario(path: str | Path) -> ScenarioConfig:
    """Load, default-fill and validate a scenario file.

    Raises :class:`ScenarioError` listing every violated invariant, or a
    parse error for non-JSON input. Area ids are cross-checked against the
    referenced (or built-in) site's parking nodes.
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ScenarioError([f"{path}: parse error: {exc}"]) from None
    cfg = scenario_from_dict(raw)
    _check_area_ids(cfg)
    return cfg


def _check_area_ids(cfg: ScenarioConfig) -> None:
    from .site import SiteError, default_site, load_site

    try:
        site = load_site(cfg.site_ref) if cfg.site_ref else default_site()
    except (OSError, SiteError) as exc:
        raise ScenarioError([f"site_ref: {exc}"]) from None
    known = set(site.parking_nodes)
    missing = [a.area_id for a in cfg.areas if a.area_id not in known]
    if missing:
        raise ScenarioError(
            [f"unknown area id {m!r}: site parking areas are {sorted(known)}" for m in missing]
        )


def save_scenario(cfg: ScenarioConfig, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(cfg.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
