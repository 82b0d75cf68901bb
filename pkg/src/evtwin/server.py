"""Live twin server: HTTP control + streaming observation of sessions.

A session wraps one deterministic :class:`SessionEngine`; commands queue at
tick boundaries and every world-mutating command is recorded with its
effective tick, so (config, command log) replays to the identical snapshot
sequence. The HTTP layer only schedules advancement and fans snapshots out
to subscribers (coalesced to at most 10 messages/second each).
"""

from __future__ import annotations

import asyncio
import hashlib
import json
import secrets
import time
from dataclasses import replace

from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse

from .config import ScenarioConfig, ScenarioError, scenario_from_dict
from .sim import STEPS_PER_DAY, World
from .site import default_site, to_geojson

SPEED_CHOICES = (1, 6, 12, 60)
MAX_STREAM_RATE_HZ = 10.0
SNAPSHOT_AGENT_CAP = 2000
SESSION_IDLE_EXPIRY_S = 30 * 60


class CommandError(ValueError):
    pass


class SessionEngine:
    """Deterministic core: a world advanced tick by tick with a command log.

    ``tick`` counts executed steps across days. Commands queued at tick T
    are folded in before step T+1 executes; replaying the recorded log
    reproduces identical snapshots.
    """

    def __init__(self, config: ScenarioConfig):
        self.config = config
        self.world = World(config, collect_events=True)
        self.world.init_day(0)
        self.tick = 0
        self.ended = False
        self.command_log: list[dict] = []
        self._pending: list[dict] = []
        self.total_requested = 0
        self.total_satisfied = 0

    # ------------------------------------------------------------- commands

    def queue_command(self, command: dict) -> int:
        """Validate and queue; returns the effective tick boundary."""
        self._validate(command)
        entry = {"tick": self.tick, "command": command}
        self.command_log.append(entry)
        self._pending.append(command)
        return self.tick

    def _validate(self, command: dict) -> None:
        kind = command.get("kind")
        if kind == "set_policies":
            body = command.get("policies", {})
            pol = replace(self.config.policies, **body)
            errs = pol.validate()
            if errs:
                raise CommandError("; ".join(errs))
        elif kind == "set_ports":
            area = command.get("area")
            if area not in self.world.areas:
                raise CommandError(f"unknown area {area!r}")
            n11, n30 = int(command.get("n11", 0)), int(command.get("n30", 0))
            if not 0 <= n11 <= 50:
                raise CommandError(f"n11 must be in [0, 50], got {n11}")
            if not 0 <= n30 <= 10:
                raise CommandError(f"n30 must be in [0, 10], got {n30}")
        elif kind == "reset":
            if "seed" in command and command["seed"] is not None:
                int(command["seed"])
        else:
            raise CommandError(f"unknown command kind {kind!r}")

    def _apply(self, command: dict) -> None:
        kind = command["kind"]
        if kind == "set_policies":
            pol = replace(self.config.policies, **command.get("policies", {}))
            self.config = replace(self.config, policies=pol)
            self.world.config = self.config
        elif kind == "set_ports":
            self._resize_ports(command["area"], int(command["n11"]), int(command["n30"]))
        elif kind == "reset":
            seed = command.get("seed")
            cfg = self.config if seed is None else replace(self.config, rng_seed=int(seed))
            self.config = cfg
            self.world = World(cfg, collect_events=True)
            self.world.init_day(0)
            self.tick = 0
            self.ended = False
            self.total_requested = 0
            self.total_satisfied = 0
            # a reset starts a fresh deterministic timeline
            self.command_log = []

    def _resize_ports(self, area_id: str, n11: int, n30: int) -> None:
        """Grow by appending ports; shrink removes free ports first and
        marks the remainder draining (retired once their occupant leaves)."""
        area = self.world.areas[area_id]
        next_id = max(self.world.ports, default=-1) + 1
        for power, target in ((11.0, n11), (30.0, n30)):
            live = [p for p in area.ports if p.power_kw == power and not p.draining]
            if target > len(live):
                for _ in range(target - len(live)):
                    from .sim import PortState

                    port = PortState(next_id, area_id, power)
                    next_id += 1
                    area.ports.append(port)
                    self.world.ports[port.port_id] = port
            elif target < len(live):
                to_drop = len(live) - target
                free = sorted(
                    (p for p in live if p.occupant is None),
                    key=lambda p: -p.port_id,
                )
                for p in free[:to_drop]:
                    area.ports.remove(p)
                    del self.world.ports[p.port_id]
                    to_drop -= 1
                if to_drop > 0:
                    occupied = sorted(
                        (p for p in live if p.occupant is not None),
                        key=lambda p: -p.port_id,
                    )
                    for p in occupied[:to_drop]:
                        p.draining = True

    def _sweep_drained(self) -> None:
        for area in self.world.areas.values():
            dead = [p for p in area.ports if p.draining and p.occupant is None]
            for p in dead:
                area.ports.remove(p)
                self.world.ports.pop(p.port_id, None)

    # ------------------------------------------------------------- stepping

    def flush_pending(self) -> None:
        cmds, self._pending = self._pending, []
        for cmd in cmds:
            self._apply(cmd)

    def advance(self, n: int = 1) -> None:
        for _ in range(n):
            if self.ended:
                return
            self.flush_pending()
            self.world.step()
            self._sweep_drained()
            self.tick += 1
            if self.world.tick >= STEPS_PER_DAY:
                self.total_requested += self.world.day_requested
                self.total_satisfied += self.world.day_satisfied
                self.world.finish_day()
                if self.world.day + 1 < self.config.horizon_days:
                    self.world.init_day(self.world.day + 1)
                else:
                    self.ended = True

    # ------------------------------------------------------------- snapshot

    def snapshot(self) -> dict:
        """Deterministic world view at the current tick boundary."""
        w = self.world
        requested = self.total_requested + w.day_requested
        satisfied = self.total_satisfied + w.day_satisfied
        led = w.ledger
        generated = led.solar_generated_kwh + led.wind_generated_kwh
        vehicles = []
        for v in w.vehicles[:SNAPSHOT_AGENT_CAP]:
            x, y = w.vehicle_position(v)
            vehicles.append(
                {
                    "id": v.vid,
                    "kind": v.kind,
                    "x": round(x, 1),
                    "y": round(y, 1),
                    "soc": round(v.soc, 2) if v.kind == "EV" else None,
                    "state": v.moving_obj,
                    "slot": v.parking_slot,
                    "charging": v.is_charging,
                }
            )
        areas = []
        for aid in w._area_order:
            area = w.areas[aid]
            live = [p for p in area.ports if not p.draining]
            areas.append(
                {
                    "area_id": aid,
                    "ports_total": len(live),
                    "ports_occupied": area.occupied_count(),
                    "free_11": len(area.free_ports(11.0)),
                    "free_30": len(area.free_ports(30.0)),
                    "inactive_capacity": area.inactive_capacity,
                    "inactive_used": area.inactive_used,
                    "draining": len(area.ports) - len(live),
                }
            )
        return {
            "schema_version": 1,
            "tick": self.tick,
            "day": w.day,
            "tick_of_day": w.tick,
            "minute_of_day": w.tick * 5,
            "ended": self.ended,
            "vehicles": vehicles,
            "vehicle_count": len(w.vehicles),
            "areas": areas,
            "queue_len": len(w.queue),
            "kpi": {
                "requested": requested,
                "satisfied": satisfied,
                "satisfaction_so_far": (satisfied / requested) if requested else 1.0,
                "self_sufficiency_so_far": (
                    led.renewable_served_kwh / led.demand_kwh if led.demand_kwh else 1.0
                ),
                "self_consumption_so_far": (
                    led.renewable_served_kwh / generated if generated else 1.0
                ),
                "solar_generated_kwh": round(led.solar_generated_kwh, 3),
                "wind_generated_kwh": round(led.wind_generated_kwh, 3),
                "renewable_served_kwh": round(led.renewable_served_kwh, 3),
                "grid_import_kwh": round(led.grid_import_kwh, 3),
                "demand_kwh": round(led.demand_kwh, 3),
                "fee_revenue_vnd": led.idle_fee_revenue_vnd,
                "bess_soc_kwh": round(w.bess.soc_kwh, 3),
            },
        }

    def snapshot_hash(self) -> str:
        blob = json.dumps(self.snapshot(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def replay_snapshot_hashes(
    config: ScenarioConfig, command_log: list[dict], ticks: list[int]
) -> dict[int, str]:
    """Re-execute a command log and hash snapshots at the requested ticks."""
    engine = SessionEngine(config)
    by_tick: dict[int, list[dict]] = {}
    for entry in command_log:
        by_tick.setdefault(int(entry["tick"]), []).append(entry["command"])
    out: dict[int, str] = {}
    targets = sorted(set(ticks))
    horizon = max(targets) if targets else 0
    t = 0
    if 0 in by_tick:
        for cmd in by_tick[0]:
            engine.queue_command(cmd)
    if t in targets:
        out[t] = engine.snapshot_hash()
    while t < horizon and not engine.ended:
        engine.advance(1)
        t = engine.tick
        for cmd in by_tick.get(t, []):
            engine.queue_command(cmd)
        if t in targets:
            out[t] = engine.snapshot_hash()
    return out


class LiveSession:
    """Async wrapper: run mode, subscribers and broadcast coalescing."""

    def __init__(self, session_id: str, engine: SessionEngine):
        self.id = session_id
        self.engine = engine
        self.mode = "paused"
        self.speed = 1
        self.subscribers: list[asyncio.Queue] = []
        self.last_activity = time.monotonic()
        self._runner: asyncio.Task | None = None
        self._last_broadcast = 0.0
        self._last_vehicles: dict[int, tuple] = {}
        self._event_mark = 0
        self._lock = asyncio.Lock()

    def touch(self) -> None:
        self.last_activity = time.monotonic()

    # ------------------------------------------------------------ streaming

    def _delta_since_last(self) -> dict:
        snap = self.engine.snapshot()
        current = {v["id"]: tuple(sorted(v.items())) for v in snap["vehicles"]}
        changed = [
            dict(items)
            for vid, items in current.items()
            if self._last_vehicles.get(vid) != items
        ]
        removed = [vid for vid in self._last_vehicles if vid not in current]
        self._last_vehicles = current
        events = self.engine.world.events[self._event_mark :]
        self._event_mark = len(self.engine.world.events)
        return {
            "type": "delta",
            "tick": snap["tick"],
            "day": snap["day"],
            "minute_of_day": snap["minute_of_day"],
            "ended": snap["ended"],
            "vehicles": changed,
            "removed": removed,
            "areas": snap["areas"],
            "queue_len": snap["queue_len"],
            "kpi": snap["kpi"],
            "events": events[-50:],
        }

    def full_message(self) -> dict:
        snap = self.engine.snapshot()
        self._last_vehicles = {
            v["id"]: tuple(sorted(v.items())) for v in snap["vehicles"]
        }
        self._event_mark = len(self.engine.world.events)
        return {"type": "snapshot", "mode": self.mode, "speed": self.speed, **snap}

    def _publish(self, message: dict) -> None:
        for q in list(self.subscribers):
            if q.qsize() > 200:  # slow consumer: drop oldest
                try:
                    q.get_nowait()
                except asyncio.QueueEmpty:
                    pass
            q.put_nowait(message)

    def broadcast(self, force: bool = False) -> None:
        now = time.monotonic()
        if not force and now - self._last_broadcast < 1.0 / MAX_STREAM_RATE_HZ:
            return
        self._last_broadcast = now
        if self.subscribers:
            self._publish(self._delta_since_last())

    def end_stream(self) -> None:
        self._publish({"type": "end", "tick": self.engine.tick})

    # ------------------------------------------------------------ run modes

    async def start(self, speed: int) -> None:
        if speed not in SPEED_CHOICES:
            raise CommandError(f"speed must be one of {SPEED_CHOICES}")
        self.speed = speed
        if self.mode == "running" and self._runner and not self._runner.done():
            return
        self.mode = "running"
        self._runner = asyncio.create_task(self._run_loop())

    async def pause(self) -> None:
        self.mode = "paused"
        if self._runner:
            self._runner.cancel()
            try:
                await self._runner
            except asyncio.CancelledError:
                pass
            self._runner = None
        self.broadcast(force=True)

    async def _run_loop(self) -> None:
        try:
            while self.mode == "running" and not self.engine.ended:
                async with self._lock:
                    self.engine.advance(1)
                self.broadcast()
                await asyncio.sleep(1.0 / self.speed)
            if self.engine.ended:
                self.mode = "paused"
                self.broadcast(force=True)
                self.end_stream()
        except asyncio.CancelledError:
            raise

    async def step(self, n: int) -> None:
        async with self._lock:
            self.engine.advance(n)
        self.broadcast(force=True)
        if self.engine.ended:
            self.end_stream()


def create_app(static_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="evtwin server", version="0.1.0")
    sessions: dict[str, LiveSession] = {}
    app.state.sessions = sessions
    site_doc = to_geojson(default_site())

    def get_session(session_id: str) -> LiveSession:
        session = sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")
        session.touch()
        return session

    def reap_idle() -> None:
        cutoff = time.monotonic() - SESSION_IDLE_EXPIRY_S
        for sid in [s for s, sess in sessions.items() if sess.last_activity < cutoff]:
            sessions.pop(sid, None)

    @app.get("/api/site")
    def api_site():
        return site_doc

    @app.post("/api/sessions", status_code=201)
    def create_session(body: dict):
        reap_idle()
        try:
            cfg = scenario_from_dict(body)
            engine = SessionEngine(cfg)
        except ScenarioError as exc:
            return JSONResponse(
                status_code=400, content={"detail": "invalid config", "violations": exc.violations}
            )
        except ValueError as exc:
            return JSONResponse(
                status_code=400, content={"detail": "invalid config", "violations": [str(exc)]}
            )
        sid = secrets.token_urlsafe(16)
        sessions[sid] = LiveSession(sid, engine)
        return {"id": sid}

    @app.get("/api/sessions/{session_id}")
    def session_status(session_id: str):
        s = get_session(session_id)
        return {
            "id": s.id,
            "mode": s.mode,
            "speed": s.speed,
            "tick": s.engine.tick,
            "day": s.engine.world.day,
            "ended": s.engine.ended,
            "subscribers": len(s.subscribers),
            "commands": len(s.engine.command_log),
        }

    @app.get("/api/sessions/{session_id}/snapshot")
    def session_snapshot(session_id: str):
        return get_session(session_id).full_message()

    @app.get("/api/sessions/{session_id}/command-log")
    def session_command_log(session_id: str):
        s = get_session(session_id)
        return {"config": s.engine.config.to_dict(), "command_log": s.engine.command_log}

    @app.get("/api/sessions/{session_id}/events")
    def session_events(session_id: str, since: int = 0, limit: int = 500):
        s = get_session(session_id)
        evs = s.engine.world.events
        page = evs[since : since + limit]
        return {"events": page, "next": since + len(page), "total": len(evs)}

    @app.post("/api/sessions/{session_id}/control")
    async def control(session_id: str, body: dict):
        s = get_session(session_id)
        kind = body.get("kind")
        try:
            if kind == "start":
                await s.start(int(body.get("speed", 1)))
                return {"applied_at_tick": s.engine.tick, "mode": s.mode, "speed": s.speed}
            if kind == "pause":
                await s.pause()
                return {"applied_at_tick": s.engine.tick, "mode": s.mode}
            if kind == "step":
                n = int(body.get("n", 1))
                if n < 1:
                    raise CommandError("step count must be >= 1")
                await s.step(n)
                return {"applied_at_tick": s.engine.tick, "mode": s.mode}
            if kind in ("set_policies", "set_ports", "reset"):
                tick = s.engine.queue_command(body)
                if kind == "reset" and s.mode == "paused":
                    async with s._lock:
                        s.engine.flush_pending()
                s.broadcast(force=True)
                return {"applied_at_tick": tick}
            raise CommandError(f"unknown command kind {kind!r}")
        except CommandError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from None

    @app.websocket("/api/sessions/{session_id}/stream")
    async def stream(ws: WebSocket, session_id: str):
        session = sessions.get(session_id)
        if session is None:
            await ws.close(code=4404)
            return
        await ws.accept()
        q: asyncio.Queue = asyncio.Queue()
        session.subscribers.append(q)
        session.touch()
        try:
            await ws.send_json(session.full_message())
            while True:
                try:
                    msg = await asyncio.wait_for(q.get(), timeout=2.0)
                except asyncio.TimeoutError:
                    msg = {"type": "heartbeat", "tick": session.engine.tick,
                           "mode": session.mode}
                await ws.send_json(msg)
                if msg.get("type") == "end":
                    break
        except (WebSocketDisconnect, RuntimeError):
            pass
        finally:
            if q in session.subscribers:
                session.subscribers.remove(q)

    if static_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static_dir, html=True), name="dashboard")

    return app
