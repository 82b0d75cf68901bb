import { TickSeries } from "./ringbuffer.js";
import type {
  AreaStatus,
  DeltaMessage,
  Kpi,
  SimEvent,
  SnapshotMessage,
  StreamMessage,
  VehicleView,
} from "./types.js";

const CHART_WINDOW = 576; // two simulated days of 5-minute ticks

export type ConnectionState = "connecting" | "live" | "reconnecting" | "ended";

/** Client-side session state: merges snapshots and deltas from the stream,
 * keeps bounded KPI series, and never lets the displayed tick go backwards
 * (except through an explicit reset to tick 0). The dashboard computes no
 * domain math; every number shown comes from a server snapshot field. */
export class SessionViewModel {
  connection: ConnectionState = "connecting";
  mode = "paused";
  speed = 1;
  tick = -1;
  day = 0;
  minuteOfDay = 0;
  ended = false;
  queueLen = 0;
  kpi: Kpi | null = null;
  vehicles = new Map<number, VehicleView>();
  areas = new Map<string, AreaStatus>();
  eventLog: SimEvent[] = [];
  pendingCommand = false;

  readonly satisfaction = new TickSeries(CHART_WINDOW);
  readonly selfSufficiency = new TickSeries(CHART_WINDOW);
  readonly selfConsumption = new TickSeries(CHART_WINDOW);
  readonly gridKwh = new TickSeries(CHART_WINDOW);
  readonly renewableKwh = new TickSeries(CHART_WINDOW);
  readonly feeRevenue = new TickSeries(CHART_WINDOW);

  private changed: Array<() => void> = [];

  onChange(fn: () => void): void {
    this.changed.push(fn);
  }

  private notify(): void {
    for (const fn of this.changed) fn();
  }

  /** Feed one stream message; returns the message type handled. */
  apply(msg: StreamMessage): string {
    switch (msg.type) {
      case "snapshot":
        this.applySnapshot(msg);
        break;
      case "delta":
        this.applyDelta(msg);
        break;
      case "heartbeat":
        if (msg.mode) this.mode = msg.mode;
        this.notify();
        break;
      case "end":
        this.ended = true;
        this.connection = "ended";
        this.notify();
        break;
    }
    return msg.type;
  }

  private applySnapshot(msg: SnapshotMessage): void {
    const isReset = msg.tick < this.tick;
    if (isReset) {
      this.satisfaction.clear();
      this.selfSufficiency.clear();
      this.selfConsumption.clear();
      this.gridKwh.clear();
      this.renewableKwh.clear();
      this.feeRevenue.clear();
      this.eventLog = [];
    }
    this.connection = "live";
    if (msg.mode) this.mode = msg.mode;
    if (msg.speed) this.speed = msg.speed;
    this.tick = msg.tick;
    this.day = msg.day;
    this.minuteOfDay = msg.minute_of_day;
    this.ended = msg.ended;
    this.queueLen = msg.queue_len;
    this.vehicles = new Map(msg.vehicles.map((v) => [v.id, v]));
    this.areas = new Map(msg.areas.map((a) => [a.area_id, a]));
    this.recordKpi(msg.tick, msg.kpi);
    this.notify();
  }

  private applyDelta(msg: DeltaMessage): void {
    if (msg.tick < this.tick) return; // stale after resync
    this.tick = msg.tick;
    this.day = msg.day;
    this.minuteOfDay = msg.minute_of_day;
    this.ended = msg.ended;
    this.queueLen = msg.queue_len;
    for (const v of msg.vehicles) this.vehicles.set(v.id, v);
    for (const id of msg.removed) this.vehicles.delete(id);
    for (const a of msg.areas) this.areas.set(a.area_id, a);
    for (const e of msg.events) this.eventLog.push(e);
    if (this.eventLog.length > 400) {
      this.eventLog.splice(0, this.eventLog.length - 400);
    }
    this.recordKpi(msg.tick, msg.kpi);
    this.notify();
  }

  /** Tick-keyed: re-delivered ticks (reconnect, coalesced repeats) are
   * dropped by the series themselves. */
  private recordKpi(tick: number, kpi: Kpi): void {
    this.kpi = kpi;
    this.satisfaction.push(tick, kpi.satisfaction_so_far);
    this.selfSufficiency.push(tick, kpi.self_sufficiency_so_far);
    this.selfConsumption.push(tick, kpi.self_consumption_so_far);
    this.gridKwh.push(tick, kpi.grid_import_kwh);
    this.renewableKwh.push(tick, kpi.renewable_served_kwh);
    this.feeRevenue.push(tick, kpi.fee_revenue_vnd);
  }

  evCount(): number {
    let n = 0;
    for (const v of this.vehicles.values()) if (v.kind === "EV") n += 1;
    return n;
  }

  chargingCount(): number {
    let n = 0;
    for (const v of this.vehicles.values()) if (v.charging) n += 1;
    return n;
  }

  clockLabel(): string {
    const h = Math.floor(this.minuteOfDay / 60);
    const m = this.minuteOfDay % 60;
    const pad = (x: number) => String(x).padStart(2, "0");
    return `day ${this.day + 1} ${pad(h)}:${pad(m)}`;
  }
}
