// Payload types mirroring the server's documented API schemas.

export interface VehicleView {
  id: number;
  kind: "EV" | "gasoline";
  x: number;
  y: number;
  soc: number | null;
  state: string;
  slot: string;
  charging: boolean;
}

export interface AreaStatus {
  area_id: string;
  ports_total: number;
  ports_occupied: number;
  free_11: number;
  free_30: number;
  inactive_capacity: number;
  inactive_used: number;
  draining: number;
}

export interface Kpi {
  requested: number;
  satisfied: number;
  satisfaction_so_far: number;
  self_sufficiency_so_far: number;
  self_consumption_so_far: number;
  solar_generated_kwh: number;
  wind_generated_kwh: number;
  renewable_served_kwh: number;
  grid_import_kwh: number;
  demand_kwh: number;
  fee_revenue_vnd: number;
  bess_soc_kwh: number;
}

export interface SimEvent {
  tick: number;
  minute: number;
  vehicle_id: number | null;
  event: string;
  detail: string;
}

export interface SnapshotMessage {
  type: "snapshot";
  schema_version?: number;
  mode?: string;
  speed?: number;
  tick: number;
  day: number;
  tick_of_day: number;
  minute_of_day: number;
  ended: boolean;
  vehicles: VehicleView[];
  vehicle_count: number;
  areas: AreaStatus[];
  queue_len: number;
  kpi: Kpi;
}

export interface DeltaMessage {
  type: "delta";
  tick: number;
  day: number;
  minute_of_day: number;
  ended: boolean;
  vehicles: VehicleView[];
  removed: number[];
  areas: AreaStatus[];
  queue_len: number;
  kpi: Kpi;
  events: SimEvent[];
}

export interface HeartbeatMessage {
  type: "heartbeat";
  tick: number;
  mode?: string;
}

export interface EndMessage {
  type: "end";
  tick: number;
}

export type StreamMessage =
  | SnapshotMessage
  | DeltaMessage
  | HeartbeatMessage
  | EndMessage;

export type ControlCommand =
  | { kind: "start"; speed: number }
  | { kind: "pause" }
  | { kind: "step"; n: number }
  | { kind: "set_policies"; policies: Record<string, boolean | number> }
  | { kind: "set_ports"; area: string; n11: number; n30: number }
  | { kind: "reset"; seed?: number };

export interface ControlAck {
  applied_at_tick: number;
  mode?: string;
  speed?: number;
}

export interface SiteFeature {
  type: "Feature";
  geometry: { type: "Point" | "LineString"; coordinates: number[] | number[][] };
  properties: Record<string, unknown>;
}

export interface SiteGeoJSON {
  type: "FeatureCollection";
  features: SiteFeature[];
}
