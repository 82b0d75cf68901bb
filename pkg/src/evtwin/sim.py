"""Time-stepped agent simulation of the charging site.

One tick is five minutes; a day is 288 ticks. Within a tick the order is
fixed: (1) energy generation and dispatch against the current charging
load, (2) vehicle transitions (work departures free slots first, then
arrivals are assigned), (3) charging increments, (4) idle-fee/relocation
policy hooks, (5) notification dispatch of free ports to the waiting
queue. Everything random draws from one per-day generator seeded from
(scenario seed, day index), so identical inputs replay identically.

Vehicles re-spawn each day with fresh state; the battery storage and the
energy ledger carry across days.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .config import ScenarioConfig
from .energy import BessState, EnergyLedger, station_generation_kw, step_energy
from .site import SiteGraph, default_site, load_site
from .weather import STEPS_PER_DAY, WeatherSeries, load_weather, synth_weather

MINUTES_PER_TICK = 5

EV = "EV"
GASOLINE = "gasoline"

RESTING = "resting"
COMMUTING_IN = "commuting_in"
PARKING = "parking"
WORKING = "working"
LEAVING = "leaving"

SLOT_NONE = "none"
SLOT_ACTIVE = "active_CS"
SLOT_INACTIVE = "inactive_CS"


@dataclass
class Vehicle:
    vid: int
    kind: str
    home: str
    parking_area: str
    start_work_min: int
    end_work_min: int
    travel_min: float
    ev_model: str | None = None
    battery_kwh: float = 0.0
    soc: float = 0.0
    priority_des: bool = False
    priority_fast: bool = False
    moving_obj: str = RESTING
    parking_slot: str = SLOT_NONE
    slot_area: str | None = None
    port_id: int | None = None
    is_charging: bool = False
    requested_charge: bool = False
    satisfied: bool = False
    full_since_min: int | None = None
    fees_accrued_vnd: int = 0
    in_queue: bool = False
    overflowed: bool = False
    depart_home_min: int = 0
    return_home_min: int | None = None


@dataclass
class PortState:
    port_id: int
    area_id: str
    power_kw: float
    occupant: int | None = None
    session_start_min: int | None = None
    full_since_min: int | None = None
    draining: bool = False  # shrink pending: retire when freed


@dataclass
class AreaState:
    area_id: str
    ports: list[PortState]
    inactive_capacity: int
    inactive_used: int = 0

    @property
    def inactive_free(self) -> int:
        return self.inactive_capacity - self.inactive_used

    def free_ports(self, power_kw: float | None = None) -> list[PortState]:
        return [
            p
            for p in self.ports
            if p.occupant is None
            and not p.draining
            and (power_kw is None or p.power_kw == power_kw)
        ]

    def occupied_count(self) -> int:
        return sum(1 for p in self.ports if p.occupant is not None)


@dataclass
class DayReport:
    day: int
    ev_count: int
    gasoline_count: int
    ev_requested: int
    ev_satisfied: int
    overflow_count: int
    fee_revenue_vnd: int
    ledger_day: EnergyLedger
    ledger_total: EnergyLedger
    occupancy: dict[str, list[int]]
    queue_len: list[int]

    def as_dict(self) -> dict:
        return {
            "day": self.day,
            "ev_count": self.ev_count,
            "gasoline_count": self.gasoline_count,
            "ev_requested": self.ev_requested,
            "ev_satisfied": self.ev_satisfied,
            "overflow_count": self.overflow_count,
            "fee_revenue_vnd": self.fee_revenue_vnd,
            "ledger_day": self.ledger_day.as_dict(),
            "ledger_total": self.ledger_total.as_dict(),
            "occupancy": self.occupancy,
            "queue_len": self.queue_len,
        }


def decide_charge(soc: float, behavior, rng: np.random.Generator) -> bool:
    """Charging decision at arrival: always below the low threshold, never
    at or above the high one, coin-flip in between."""
    if soc <= behavior.soc_low_threshold:
        return True
    if soc >= behavior.soc_high_threshold:
        return False
    return bool(rng.random() < behavior.mid_charge_prob)


def weather_for(config: ScenarioConfig) -> WeatherSeries:
    ref = config.weather_ref
    if ref.startswith("synthetic:"):
        quarter = int(ref.split(":", 1)[1][1])
        series = synth_weather(quarter, seed=config.rng_seed, days=config.horizon_days)
    else:
        series = load_weather(ref)
    return series.extend_cyclic(config.horizon_days)


class World:
    """Mutable simulation state for one scenario run."""

    def __init__(
        self,
        config: ScenarioConfig,
        site: SiteGraph | None = None,
        weather: WeatherSeries | None = None,
        collect_events: bool = True,
    ):
        self.config = config
        self.site = site if site is not None else (
            load_site(config.site_ref) if config.site_ref else default_site()
        )
        parking = self.site.parking_nodes
        for a in config.areas:
            if a.area_id not in parking:
                raise ValueError(f"unknown area id {a.area_id!r}: not a parking node of the site")
        self.weather = weather if weather is not None else weather_for(config)
        if len(self.weather) < config.horizon_days * STEPS_PER_DAY:
            raise ValueError(
                f"weather series covers {self.weather.days:.2f} days, "
                f"horizon needs {config.horizon_days}"
            )
        self.collect_events = collect_events

        self.bess: BessState = config.energy.make_bess()
        self.ledger = EnergyLedger()
        self.day = -1
        self.tick = 0  # tick within day
        self.abs_tick = 0
        self.vehicles: list[Vehicle] = []
        self.areas: dict[str, AreaState] = {}
        self.ports: dict[int, PortState] = {}
        self.queue: deque[int] = deque()
        self.events: list[dict] = []
        self._build_ports()

        # per-day aggregation
        self.day_requested = 0
        self.day_satisfied = 0
        self.day_overflow = 0
        self._day_ledger_base = self.ledger.copy()
        self._occupancy: dict[str, list[int]] = {}
        self._queue_len: list[int] = []
        self._area_order = [a.area_id for a in config.areas]
        self._travel_cache: dict[tuple[str, str], float] = {}

    # ------------------------------------------------------------------ setup

    def _build_ports(self) -> None:
        pid = 0
        for a in self.config.areas:
            ports = []
            for _ in range(a.n_ports_11kw):
                ports.append(PortState(pid, a.area_id, 11.0))
                pid += 1
            for _ in range(a.n_ports_30kw):
                ports.append(PortState(pid, a.area_id, 30.0))
                pid += 1
            self.areas[a.area_id] = AreaState(a.area_id, ports, a.n_inactive_slots)
            for p in ports:
                self.ports[p.port_id] = p

    def _travel(self, from_node: str, to_node: str) -> float:
        key = (from_node, to_node)
        if key not in self._travel_cache:
            self._travel_cache[key] = self.site.travel_minutes(from_node, to_node)
        return self._travel_cache[key]

    def _sample_schedule(self, rng) -> tuple[int, int]:
        b = self.config.behavior
        windows = b.start_work_windows
        w = windows[int(rng.integers(0, len(windows)))]
        start = self._sample_grid_minute(w, rng)
        end = self._sample_grid_minute(b.end_work_window, rng)
        return start, max(end, start + MINUTES_PER_TICK)

    @staticmethod
    def _sample_grid_minute(window_h, rng) -> int:
        lo = int(round(window_h[0] * 60 / MINUTES_PER_TICK))
        hi = int(round(window_h[1] * 60 / MINUTES_PER_TICK))
        return int(rng.integers(lo, hi + 1)) * MINUTES_PER_TICK

    def init_day(self, day: int) -> None:
        """Spawn the day's agents; deterministic for (seed, day)."""
        cfg = self.config
        rng = np.random.default_rng(
            np.random.SeedSequence([cfg.rng_seed & (2**64 - 1), day])
        )
        self.rng = rng
        self.day = day
        self.tick = 0
        self.abs_tick = day * STEPS_PER_DAY
        self.queue.clear()
        self.vehicles = []
        self.day_requested = 0
        self.day_satisfied = 0
        self.day_overflow = 0
        self._day_ledger_base = self.ledger.copy()
        self._occupancy = {aid: [] for aid in self._area_order}
        self._queue_len = []
        for area in self.areas.values():
            area.inactive_used = 0
            keep = [p for p in area.ports if not p.draining]
            for p in keep:
                p.occupant = None
                p.session_start_min = None
                p.full_since_min = None
            area.ports = keep
        self.ports = {p.port_id: p for a in self.areas.values() for p in a.ports}

        homes = self.site.residential_nodes()
        parking = self.site.parking_nodes
        area_ids = self._area_order
        b = cfg.behavior
        models = sorted(b.model_mix)
        mix = np.array([b.model_mix[m] for m in models], dtype=float)
        mix = mix / mix.sum() if mix.sum() > 0 else np.full(len(models), 1 / len(models))

        vid = 0
        for _ in range(cfg.nb_electrical):
            home = homes[int(rng.integers(0, len(homes)))]
            area = area_ids[int(rng.integers(0, len(area_ids)))]
            model = models[int(rng.choice(len(models), p=mix))]
            soc = float(rng.uniform(*b.arrival_soc_range))
            start, end = self._sample_schedule(rng)
            travel = self._travel(home, parking[area])
            v = Vehicle(
                vid=vid,
                kind=EV,
                home=home,
                parking_area=area,
                start_work_min=start,
                end_work_min=end,
                travel_min=travel,
                ev_model=model,
                battery_kwh=float(b.battery_capacity_by_model[model]),
                soc=soc,
                priority_des=bool(rng.random() < b.priority_des_prob),
                priority_fast=bool(rng.random() < b.priority_fast_prob),
            )
            v.depart_home_min = max(0, int(start - math.ceil(travel)))
            self.vehicles.append(v)
            vid += 1
        for _ in range(cfg.nb_gasoline):
            home = homes[int(rng.integers(0, len(homes)))]
            area = area_ids[int(rng.integers(0, len(area_ids)))]
            start, end = self._sample_schedule(rng)
            travel = self._travel(home, parking[area])
            v = Vehicle(
                vid=vid,
                kind=GASOLINE,
                home=home,
                parking_area=area,
                start_work_min=start,
                end_work_min=end,
                travel_min=travel,
            )
            v.depart_home_min = max(0, int(start - math.ceil(travel)))
            self.vehicles.append(v)
            vid += 1

    # ------------------------------------------------------------------ events

    def _log(self, minute: int, vid: int | None, event: str, detail: str = "") -> None:
        if self.collect_events:
            self.events.append(
                {"tick": self.abs_tick, "minute": minute, "vehicle_id": vid,
                 "event": event, "detail": detail}
            )

    # ------------------------------------------------------------------ slots

    def _areas_by_distance(self, from_area: str) -> list[str]:
        parking = self.site.parking_nodes
        src = parking[from_area]
        return sorted(
            self._area_order,
            key=lambda aid: (0.0 if aid == from_area else self._travel(src, parking[aid]), aid),
        )

    def _pick_port(self, v: Vehicle) -> PortState | None:
        """Free active port honouring fast/area preferences; lowest port id
        breaks ties inside a (power, area) bucket."""
        area_order = (
            [v.parking_area] if v.priority_des else self._areas_by_distance(v.parking_area)
        )
        preferred = 30.0 if v.priority_fast else 11.0
        for power in (preferred, 41.0 - preferred):
            for aid in area_order:
                free = self.areas[aid].free_ports(power)
                if free:
                    return min(free, key=lambda p: p.port_id)
        return None

    def _free_slot_census(self) -> tuple[list[PortState], list[str]]:
        """All free active ports (sorted) and area ids with free inactive
        slots expanded per slot, in area order."""
        ports = []
        inactive = []
        for aid in self._area_order:
            area = self.areas[aid]
            ports.extend(sorted(area.free_ports(), key=lambda p: p.port_id))
            inactive.extend([aid] * area.inactive_free)
        return ports, inactive

    def _park_inactive(self, v: Vehicle, area_id: str, minute: int) -> None:
        self.areas[area_id].inactive_used += 1
        v.parking_slot = SLOT_INACTIVE
        v.slot_area = area_id
        v.moving_obj = PARKING

    def _start_session(self, v: Vehicle, port: PortState, minute: int) -> None:
        port.occupant = v.vid
        port.session_start_min = minute
        port.full_since_min = None
        v.parking_slot = SLOT_ACTIVE
        v.slot_area = port.area_id
        v.port_id = port.port_id
        v.is_charging = True
        v.moving_obj = PARKING
        if v.requested_charge and not v.satisfied and not self.config.strict_completion:
            v.satisfied = True
            self.day_satisfied += 1
        self._log(minute, v.vid, "session_start", f"port={port.port_id} area={port.area_id}")

    def _occupy_port_plain(self, v: Vehicle, port: PortState, minute: int) -> None:
        port.occupant = v.vid
        port.session_start_min = None
        port.full_since_min = None
        v.parking_slot = SLOT_ACTIVE
        v.slot_area = port.area_id
        v.port_id = port.port_id
        v.is_charging = False
        v.moving_obj = PARKING
        self._log(minute, v.vid, "park_on_port", f"port={port.port_id} (no charge)")

    def _overflow(self, v: Vehicle, minute: int) -> None:
        v.overflowed = True
        v.moving_obj = LEAVING
        v.parking_slot = SLOT_NONE
        v.return_home_min = minute + int(math.ceil(v.travel_min))
        self.day_overflow += 1
        self._log(minute, v.vid, "overflow", "site full")

    def assign_slot(self, v: Vehicle, minute: int) -> None:
        """Assignment at the gate per the arrival decision flow."""
        if v.kind == GASOLINE:
            if self.config.policies.ban_gasoline:
                _, inactive = self._free_slot_census()
                if inactive:
                    aid = inactive[int(self.rng.integers(0, len(inactive)))]
                    self._park_inactive(v, aid, minute)
                else:
                    self._overflow(v, minute)
            else:
                ports, inactive = self._free_slot_census()
                total = len(ports) + len(inactive)
                if total == 0:
                    self._overflow(v, minute)
                    return
                k = int(self.rng.integers(0, total))
                if k < len(ports):
                    self._occupy_port_plain(v, ports[k], minute)
                else:
                    self._park_inactive(v, inactive[k - len(ports)], minute)
            return

        if not v.requested_charge:
            _, inactive = self._free_slot_census()
            if inactive:
                aid = inactive[int(self.rng.integers(0, len(inactive)))]
                self._park_inactive(v, aid, minute)
                return
            ports, _ = self._free_slot_census()
            if ports:
                self._occupy_port_plain(v, ports[int(self.rng.integers(0, len(ports)))], minute)
            else:
                self._overflow(v, minute)
            return

        port = self._pick_port(v)
        if port is not None:
            self._start_session(v, port, minute)
            return
        _, inactive = self._free_slot_census()
        if inactive:
            aid = inactive[int(self.rng.integers(0, len(inactive)))]
            self._park_inactive(v, aid, minute)
            if self.config.policies.notification:
                self.queue.append(v.vid)
                v.in_queue = True
                self._log(minute, v.vid, "enqueue", f"position={len(self.queue)}")
        else:
            self._overflow(v, minute)

    def _release_slot(self, v: Vehicle, minute: int) -> None:
        if v.parking_slot == SLOT_ACTIVE and v.port_id is not None:
            port = self.ports[v.port_id]
            port.occupant = None
            port.session_start_min = None
            port.full_since_min = None
        elif v.parking_slot == SLOT_INACTIVE and v.slot_area is not None:
            self.areas[v.slot_area].inactive_used -= 1
        v.parking_slot = SLOT_NONE
        v.slot_area = None
        v.port_id = None
        v.is_charging = False
        v.full_since_min = None

    def _vacate_to_inactive(self, v: Vehicle, minute: int, reason: str) -> bool:
        """Move a port occupant to an inactive slot in the same area."""
        port = self.ports[v.port_id]
        area = self.areas[port.area_id]
        if area.inactive_free <= 0:
            return False
        port.occupant = None
        port.session_start_min = None
        port.full_since_min = None
        v.port_id = None
        v.is_charging = False
        v.full_since_min = None
        self._park_inactive(v, area.area_id, minute)
        v.moving_obj = WORKING
        self._log(minute, v.vid, reason, f"area={area.area_id}")
        return True

    # ------------------------------------------------------------------ tick

    def step(self) -> None:
        minute = self.tick * MINUTES_PER_TICK
        cfg = self.config
        pol = cfg.policies

        # (1) energy: generation this tick, dispatched against the load of
        # sessions active at tick start (vehicles leaving now draw nothing).
        plan: list[tuple[Vehicle, float]] = []
        eff = cfg.energy.charger_efficiency
        for port in self.ports.values():
            if port.occupant is None or port.session_start_min is None:
                continue
            v = self.vehicles[port.occupant]
            if not v.is_charging or v.end_work_min <= minute:
                continue
            headroom_kwh = (100.0 - v.soc) / 100.0 * v.battery_kwh
            into = min(port.power_kw * (MINUTES_PER_TICK / 60.0) * eff, headroom_kwh)
            if into > 0.0:
                plan.append((v, into))
        demand_kwh = sum(into for _, into in plan) / eff
        w = self.weather
        i = self.abs_tick
        solar_kw, wind_kw = station_generation_kw(
            float(w.ghi[i]), float(w.air_temp[i]), float(w.wind_speed[i]),
            cfg.energy.pv, cfg.energy.wind,
        )
        h = MINUTES_PER_TICK / 60.0
        self.ledger.solar_generated_kwh += solar_kw * h
        self.ledger.wind_generated_kwh += wind_kw * h
        step_energy(self.ledger, self.bess, (solar_kw + wind_kw) * h, demand_kwh)

        # (2) transitions: work departures first so arrivals see freed slots
        for v in self.vehicles:
            if v.moving_obj in (PARKING, WORKING) and v.end_work_min <= minute:
                self._release_slot(v, minute)
                if v.in_queue:
                    try:
                        self.queue.remove(v.vid)
                    except ValueError:
                        pass
                    v.in_queue = False
                v.moving_obj = LEAVING
                v.return_home_min = minute + int(math.ceil(v.travel_min))
                self._log(minute, v.vid, "depart", "")
            elif v.moving_obj == LEAVING and v.return_home_min is not None \
                    and v.return_home_min <= minute:
                v.moving_obj = RESTING
                v.return_home_min = None
        for v in self.vehicles:
            if v.moving_obj == RESTING and not v.overflowed \
                    and v.depart_home_min <= minute < v.end_work_min:
                v.moving_obj = COMMUTING_IN
                if cfg.commute_soc_drain and v.kind == EV:
                    v.soc = max(0.0, v.soc - 0.05 * v.travel_min)
            if v.moving_obj == COMMUTING_IN and v.depart_home_min + v.travel_min <= minute:
                # arrival at the gate of the target area
                if v.kind == EV:
                    v.requested_charge = decide_charge(v.soc, cfg.behavior, self.rng)
                    if v.requested_charge:
                        self.day_requested += 1
                        self._log(minute, v.vid, "request", f"soc={v.soc:.1f}")
                self.assign_slot(v, minute)
                if v.moving_obj == PARKING:
                    v.moving_obj = WORKING

        # (3) charging increments from the phase-1 plan
        for v, into in plan:
            if not v.is_charging:  # departed this tick; drew nothing
                continue
            v.soc = min(100.0, v.soc + into / v.battery_kwh * 100.0)
            if v.soc >= 100.0 and v.full_since_min is None:
                end_minute = minute + MINUTES_PER_TICK
                v.full_since_min = end_minute
                self.ports[v.port_id].full_since_min = end_minute
                if cfg.strict_completion and v.requested_charge and not v.satisfied:
                    v.satisfied = True
                    self.day_satisfied += 1
                self._log(minute, v.vid, "session_full", f"port={v.port_id}")

        # (4) policy hooks on full occupants
        if pol.idle_fee or pol.relocate_full:
            check_minute = minute + MINUTES_PER_TICK  # policies see end-of-tick clock
            for port in self.ports.values():
                if port.occupant is None or port.full_since_min is None:
                    continue
                v = self.vehicles[port.occupant]
                idle = check_minute - port.full_since_min
                if pol.relocate_full and idle >= pol.idle_grace_minutes:
                    if self._vacate_to_inactive(v, check_minute, "relocate"):
                        continue
                if pol.idle_fee and idle > pol.idle_grace_minutes:
                    owed = pol.idle_fee_rate_vnd_per_min * min(
                        MINUTES_PER_TICK, idle - pol.idle_grace_minutes
                    )
                    v.fees_accrued_vnd += owed
                    self.ledger.idle_fee_revenue_vnd += owed
                    self._log(check_minute, v.vid, "fee", f"vnd={owed}")
                    if self.rng.random() < pol.idle_comply_prob_per_check:
                        self._vacate_to_inactive(v, check_minute, "vacate_comply")

        # (5) notification: offer free ports to the queue, head first
        if pol.notification and self.queue:
            progress = True
            while progress and self.queue:
                progress = False
                for vid in list(self.queue):
                    v = self.vehicles[vid]
                    port = self._pick_port(v)
                    if port is None:
                        continue
                    # leave the inactive slot, take the port
                    if v.parking_slot == SLOT_INACTIVE and v.slot_area is not None:
                        self.areas[v.slot_area].inactive_used -= 1
                    self.queue.remove(vid)
                    v.in_queue = False
                    self._start_session(v, port, minute + MINUTES_PER_TICK)
                    v.moving_obj = WORKING
                    self._log(minute, vid, "notify_assign", f"port={port.port_id}")
                    progress = True
                    break

        for aid in self._area_order:
            self._occupancy[aid].append(self.areas[aid].occupied_count())
        self._queue_len.append(len(self.queue))
        self.tick += 1
        self.abs_tick += 1

    # ------------------------------------------------------------------ day

    def run_day(self, day: int) -> DayReport:
        self.init_day(day)
        for _ in range(STEPS_PER_DAY):
            self.step()
        return self.finish_day()

    def finish_day(self) -> DayReport:
        base = self._day_ledger_base
        total = self.ledger
        day_ledger = EnergyLedger(
            solar_generated_kwh=total.solar_generated_kwh - base.solar_generated_kwh,
            wind_generated_kwh=total.wind_generated_kwh - base.wind_generated_kwh,
            renewable_served_kwh=total.renewable_served_kwh - base.renewable_served_kwh,
            demand_kwh=total.demand_kwh - base.demand_kwh,
            grid_import_kwh=total.grid_import_kwh - base.grid_import_kwh,
            curtailed_kwh=total.curtailed_kwh - base.curtailed_kwh,
            bess_charged_kwh=total.bess_charged_kwh - base.bess_charged_kwh,
            bess_discharged_kwh=total.bess_discharged_kwh - base.bess_discharged_kwh,
            idle_fee_revenue_vnd=total.idle_fee_revenue_vnd - base.idle_fee_revenue_vnd,
            days=1,
        )
        self.ledger.days += 1
        return DayReport(
            day=self.day,
            ev_count=self.config.nb_electrical,
            gasoline_count=self.config.nb_gasoline,
            ev_requested=self.day_requested,
            ev_satisfied=self.day_satisfied,
            overflow_count=self.day_overflow,
            fee_revenue_vnd=day_ledger.idle_fee_revenue_vnd,
            ledger_day=day_ledger,
            ledger_total=self.ledger.copy(),
            occupancy={k: list(v) for k, v in self._occupancy.items()},
            queue_len=list(self._queue_len),
        )

    # ------------------------------------------------------------------ view

    def vehicle_position(self, v: Vehicle) -> tuple[float, float]:
        parking = self.site.parking_nodes
        minute = self.tick * MINUTES_PER_TICK
        if v.moving_obj == RESTING or v.overflowed and v.moving_obj != LEAVING:
            n = self.site.nodes[v.home]
            return (n.x, n.y)
        if v.moving_obj == COMMUTING_IN:
            path = self.site.path(v.home, parking[v.parking_area]) or [v.home]
            frac = (minute - v.depart_home_min) / max(v.travel_min, 1e-9)
            return self.site.position_along(path, frac)
        if v.moving_obj == LEAVING:
            dest = parking.get(v.slot_area or v.parking_area, parking[v.parking_area])
            path = self.site.path(dest, v.home) or [v.home]
            start = (v.return_home_min or minute) - int(math.ceil(v.travel_min))
            frac = (minute - start) / max(v.travel_min, 1e-9)
            return self.site.position_along(path, frac)
        aid = v.slot_area or v.parking_area
        n = self.site.nodes[parking[aid]]
        return (n.x, n.y)


def run(
    config: ScenarioConfig,
    site: SiteGraph | None = None,
    weather: WeatherSeries | None = None,
    collect_events: bool = False,
) -> list[DayReport]:
    """Run the full horizon and return one report per day."""
    world = World(config, site=site, weather=weather, collect_events=collect_events)
    return [world.run_day(d) for d in range(config.horizon_days)]
