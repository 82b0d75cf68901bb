"""Renewable generation, battery storage dispatch and money.

Single-panel PV output is ``P = k * (G/G_ref) * P_stc * eta * [1 - beta_T *
(T_c - T_c_stc)]`` with the cell temperature from the NOCT linear model.
Wind turbines follow the classic cubic power curve between cut-in and rated
speed, flat at rated power up to cut-out, with a power-law shear correction
from the measurement height to the hub.

Dispatch is greedy self-consumption: renewables serve the charging load
directly, surplus charges the battery (remainder curtailed), deficits
discharge the battery and only then import from the grid.

All currency is 64-bit integer VND; energies are kWh floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace


@dataclass(frozen=True)
class PvParams:
    """Single PV panel model constants plus plant sizing.

    Defaults describe a 610 W bifacial panel; ``unit_panel_cost`` is a
    config parameter, not a vendor quote.
    """

    k: float = 1.15                # bifacial absorption factor
    g_ref: float = 800.0           # reference irradiance, W/m2
    p_stc: float = 610.0           # rated panel power, W
    eta: float = 0.226             # absorption efficiency
    beta_t: float = 0.0028         # power degradation per degC above STC
    t_c_stc: float = 25.0          # STC cell temperature, degC
    noct: float = 45.0             # nominal operating cell temperature, degC
    nb_solar: int = 0
    unit_panel_area_m2: float = 2.7
    unit_panel_cost_vnd: int = 4_000_000

    def validate(self) -> list[str]:
        errs = []
        for name in ("k", "g_ref", "p_stc", "eta", "beta_t", "noct"):
            if getattr(self, name) <= 0:
                errs.append(f"pv.{name} must be > 0, got {getattr(self, name)}")
        if not 0 <= self.nb_solar <= 1000:
            errs.append(f"pv.nb_solar must be in [0, 1000], got {self.nb_solar}")
        return errs


@dataclass(frozen=True)
class WindParams:
    """Turbine power-curve constants, hub shear law and plant sizing."""

    p_rated: float = 3000.0        # W
    v_cut_in: float = 3.5          # m/s
    v_cut_out: float = 45.0        # m/s
    v_rated: float = 12.0          # m/s
    hub_height_m: float = 100.0
    ref_height_m: float = 10.0
    shear_alpha: float = 0.14
    nb_wind: int = 0
    unit_turbine_cost_vnd: int = 32_000_000

    def validate(self) -> list[str]:
        errs = []
        if not self.v_cut_in < self.v_rated < self.v_cut_out:
            errs.append(
                "wind speeds must satisfy v_cut_in < v_rated < v_cut_out, got "
                f"{self.v_cut_in}, {self.v_rated}, {self.v_cut_out}"
            )
        if not 0 <= self.nb_wind <= 20:
            errs.append(f"wind.nb_wind must be in [0, 20], got {self.nb_wind}")
        return errs


@dataclass
class BessState:
    """Battery energy storage: capacity, current charge and efficiencies."""

    capacity_kwh: float = 80.0
    soc_kwh: float = 0.0
    charge_eff: float = 0.95
    discharge_eff: float = 0.95
    unit_cost_vnd: int = 300_000_000

    def validate(self) -> list[str]:
        errs = []
        if self.capacity_kwh < 0:
            errs.append(f"bess.capacity_kwh must be >= 0, got {self.capacity_kwh}")
        if not 0.0 <= self.soc_kwh <= self.capacity_kwh:
            errs.append(
                f"bess.soc_kwh must be in [0, {self.capacity_kwh}], got {self.soc_kwh}"
            )
        for name in ("charge_eff", "discharge_eff"):
            v = getattr(self, name)
            if not 0.0 < v <= 1.0:
                errs.append(f"bess.{name} must be in (0, 1], got {v}")
        return errs


@dataclass
class EnergyLedger:
    """Monotone accumulators for one simulation run (kWh and VND)."""

    solar_generated_kwh: float = 0.0
    wind_generated_kwh: float = 0.0
    renewable_served_kwh: float = 0.0   # direct use + battery discharge output
    demand_kwh: float = 0.0
    grid_import_kwh: float = 0.0
    curtailed_kwh: float = 0.0
    bess_charged_kwh: float = 0.0       # energy stored (after charge losses)
    bess_discharged_kwh: float = 0.0    # energy delivered (after discharge losses)
    idle_fee_revenue_vnd: int = 0
    days: int = 0

    def copy(self) -> "EnergyLedger":
        return replace(self)

    def as_dict(self) -> dict:
        return {
            "solar_generated_kwh": self.solar_generated_kwh,
            "wind_generated_kwh": self.wind_generated_kwh,
            "renewable_served_kwh": self.renewable_served_kwh,
            "demand_kwh": self.demand_kwh,
            "grid_import_kwh": self.grid_import_kwh,
            "curtailed_kwh": self.curtailed_kwh,
            "bess_charged_kwh": self.bess_charged_kwh,
            "bess_discharged_kwh": self.bess_discharged_kwh,
            "idle_fee_revenue_vnd": self.idle_fee_revenue_vnd,
            "days": self.days,
        }


def cell_temperature(air_temp: float, ghi: float, noct: float = 45.0) -> float:
    """NOCT linear cell-temperature model: ``T_air + (NOCT - 20) * G / 800``."""
    return air_temp + (noct - 20.0) * ghi / 800.0


def pv_power_at_cell_temp(ghi: float, t_c: float, params: PvParams) -> float:
    """Single-panel power in W given the cell temperature directly;
    clamped at zero (strong derating cannot go negative)."""
    if ghi <= 0.0:
        return 0.0
    p = (
        params.k
        * (ghi / params.g_ref)
        * params.p_stc
        * params.eta
        * (1.0 - params.beta_t * (t_c - params.t_c_stc))
    )
    return max(0.0, p)


def pv_power(ghi: float, air_temp: float, params: PvParams) -> float:
    """Single-panel power in W at the given irradiance and *air*
    temperature, with the cell temperature from the NOCT model."""
    if ghi <= 0.0:
        return 0.0
    return pv_power_at_cell_temp(ghi, cell_temperature(air_temp, ghi, params.noct), params)


def wind_speed_at_hub(v_ref: float, params: WindParams) -> float:
    """Power-law shear: ``v_hub = v_ref * (h_hub / h_ref) ** alpha``."""
    if v_ref <= 0.0:
        return 0.0
    return v_ref * (params.hub_height_m / params.ref_height_m) ** params.shear_alpha


def wind_power(v_hub: float, params: WindParams) -> float:
    """Power of a single turbine in W from the piecewise cubic curve."""
    if v_hub <= params.v_cut_in or v_hub >= params.v_cut_out:
        return 0.0
    if v_hub >= params.v_rated:
        return params.p_rated
    num = v_hub**3 - params.v_cut_in**3
    den = params.v_rated**3 - params.v_cut_in**3
    return params.p_rated * num / den


def station_generation_kw(
    ghi: float, air_temp: float, v_ref: float, pv: PvParams, wind: WindParams
) -> tuple[float, float]:
    """Whole-plant (solar_kw, wind_kw) at one instant."""
    solar_kw = pv.nb_solar * pv_power(ghi, air_temp, pv) / 1000.0
    wind_kw = wind.nb_wind * wind_power(wind_speed_at_hub(v_ref, wind), wind) / 1000.0
    return solar_kw, wind_kw


def step_energy(
    ledger: EnergyLedger,
    bess: BessState,
    generation_kwh: float,
    demand_kwh: float,
) -> float:
    """Dispatch one 5-minute step; mutates ledger and bess in place.

    Priority: renewables serve demand directly, surplus charges the
    battery (losses on the way in, headroom respected, remainder
    curtailed), deficits discharge the battery (losses on the way out),
    whatever is left imports from the grid. Returns the grid import in
    kWh. The per-step balance ``demand = direct + discharge_out + grid``
    holds to float precision.
    """
    direct = min(generation_kwh, demand_kwh)
    surplus = generation_kwh - direct
    deficit = demand_kwh - direct

    stored = 0.0
    curtailed = 0.0
    if surplus > 0.0:
        headroom = bess.capacity_kwh - bess.soc_kwh
        stored = min(surplus * bess.charge_eff, headroom)
        absorbed = stored / bess.charge_eff if bess.charge_eff > 0 else 0.0
        curtailed = surplus - absorbed
        bess.soc_kwh = min(bess.capacity_kwh, bess.soc_kwh + stored)

    discharge_out = 0.0
    grid = 0.0
    if deficit > 0.0:
        available_out = bess.soc_kwh * bess.discharge_eff
        discharge_out = min(deficit, available_out)
        drawn = discharge_out / bess.discharge_eff if bess.discharge_eff > 0 else 0.0
        bess.soc_kwh = max(0.0, bess.soc_kwh - drawn)
        grid = deficit - discharge_out

    ledger.demand_kwh += demand_kwh
    ledger.renewable_served_kwh += direct + discharge_out
    ledger.grid_import_kwh += grid
    ledger.curtailed_kwh += curtailed
    ledger.bess_charged_kwh += stored
    ledger.bess_discharged_kwh += discharge_out
    return grid


@dataclass(frozen=True)
class EnergyConfig:
    """Plant sizing, storage and tariffs for one scenario."""

    pv: PvParams = field(default_factory=PvParams)
    wind: WindParams = field(default_factory=WindParams)
    bess_capacity_kwh: float = 80.0
    bess_initial_soc_kwh: float = 0.0
    bess_charge_eff: float = 0.95
    bess_discharge_eff: float = 0.95
    bess_unit_cost_vnd: int = 300_000_000
    grid_tariff_vnd_per_kwh: int = 3_500
    charger_efficiency: float = 1.0

    def make_bess(self) -> BessState:
        return BessState(
            capacity_kwh=self.bess_capacity_kwh,
            soc_kwh=self.bess_initial_soc_kwh,
            charge_eff=self.bess_charge_eff,
            discharge_eff=self.bess_discharge_eff,
            unit_cost_vnd=self.bess_unit_cost_vnd,
        )

    def validate(self) -> list[str]:
        errs = self.pv.validate() + self.wind.validate() + self.make_bess().validate()
        if self.grid_tariff_vnd_per_kwh < 0:
            errs.append("energy.grid_tariff_vnd_per_kwh must be >= 0")
        if not 0.0 < self.charger_efficiency <= 1.0:
            errs.append("energy.charger_efficiency must be in (0, 1]")
        return errs


def investment_vnd(cfg: EnergyConfig) -> int:
    return int(
        cfg.pv.nb_solar * cfg.pv.unit_panel_cost_vnd
        + cfg.wind.nb_wind * cfg.wind.unit_turbine_cost_vnd
        + cfg.bess_unit_cost_vnd
    )


def financial_summary(ledger: EnergyLedger, cfg: EnergyConfig) -> dict:
    """Investment, monthly profit and payback period from a run ledger.

    Profit is the avoided grid cost of renewable-served energy plus idle
    fees, scaled from per-day averages to a 30-day month. Payback is
    ``inf`` when profit is non-positive.
    """
    if ledger.days < 1:
        raise ValueError("ledger must cover at least one simulated day")
    investment = investment_vnd(cfg)
    per_day_energy = ledger.renewable_served_kwh / ledger.days
    per_day_fees = ledger.idle_fee_revenue_vnd / ledger.days
    monthly_profit = int(
        round(per_day_energy * cfg.grid_tariff_vnd_per_kwh * 30 + per_day_fees * 30)
    )
    if monthly_profit <= 0:
        payback = math.inf
    else:
        payback = investment / monthly_profit
    return {
        "investment_vnd": investment,
        "monthly_profit_vnd": monthly_profit,
        "payback_months": payback,
    }
