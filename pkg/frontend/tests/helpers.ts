import type {
  AreaStatus,
  DeltaMessage,
  Kpi,
  SnapshotMessage,
  VehicleView,
} from "../src/types.js";

export function kpi(overrides: Partial<Kpi> = {}): Kpi {
  return {
    requested: 10,
    satisfied: 8,
    satisfaction_so_far: 0.8,
    self_sufficiency_so_far: 0.4,
    self_consumption_so_far: 0.9,
    solar_generated_kwh: 120,
    wind_generated_kwh: 0,
    renewable_served_kwh: 100,
    grid_import_kwh: 150,
    demand_kwh: 250,
    fee_revenue_vnd: 0,
    bess_soc_kwh: 20,
    ...overrides,
  };
}

export function vehicle(id: number, overrides: Partial<VehicleView> = {}): VehicleView {
  return {
    id,
    kind: "EV",
    x: 100 + id,
    y: 200,
    soc: 55,
    state: "working",
    slot: "inactive_CS",
    charging: false,
    ...overrides,
  };
}

export function area(areaId: string, occupied = 5): AreaStatus {
  return {
    area_id: areaId,
    ports_total: 24,
    ports_occupied: occupied,
    free_11: 15,
    free_30: 4,
    inactive_capacity: 100,
    inactive_used: 10,
    draining: 0,
  };
}

export function snapshot(tick: number, overrides: Partial<SnapshotMessage> = {}): SnapshotMessage {
  return {
    type: "snapshot",
    mode: "paused",
    speed: 1,
    tick,
    day: Math.floor(tick / 288),
    tick_of_day: tick % 288,
    minute_of_day: (tick % 288) * 5,
    ended: false,
    vehicles: [vehicle(1), vehicle(2, { kind: "gasoline", soc: null })],
    vehicle_count: 2,
    areas: [area("C-Parking")],
    queue_len: 0,
    kpi: kpi(),
    ...overrides,
  };
}

export function delta(tick: number, overrides: Partial<DeltaMessage> = {}): DeltaMessage {
  return {
    type: "delta",
    tick,
    day: Math.floor(tick / 288),
    minute_of_day: (tick % 288) * 5,
    ended: false,
    vehicles: [],
    removed: [],
    areas: [],
    queue_len: 0,
    kpi: kpi({ satisfaction_so_far: 0.8 - tick * 1e-4 }),
    events: [],
    ...overrides,
  };
}
