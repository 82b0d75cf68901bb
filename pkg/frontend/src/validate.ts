// Client-side bounds for control forms. Violations block the request from
// ever being sent; the server enforces the same limits.

export interface PortFormValues {
  area: string;
  n11: number;
  n30: number;
}

export interface PolicyFormValues {
  ban_gasoline: boolean;
  idle_fee: boolean;
  relocate_full: boolean;
  notification: boolean;
  idle_fee_rate_vnd_per_min: number;
  idle_grace_minutes: number;
}

export const PORT_LIMITS = { n11: [0, 50] as const, n30: [0, 10] as const };
export const SPEED_CHOICES = [1, 6, 12, 60] as const;

export interface FieldError {
  field: string;
  message: string;
}

function intIn(value: number, lo: number, hi: number): boolean {
  return Number.isInteger(value) && value >= lo && value <= hi;
}

export function validatePorts(values: PortFormValues): FieldError[] {
  const errors: FieldError[] = [];
  if (!values.area) {
    errors.push({ field: "area", message: "pick a charging area" });
  }
  const [lo11, hi11] = PORT_LIMITS.n11;
  if (!intIn(values.n11, lo11, hi11)) {
    errors.push({ field: "n11", message: `11 kW ports must be an integer in [${lo11}, ${hi11}]` });
  }
  const [lo30, hi30] = PORT_LIMITS.n30;
  if (!intIn(values.n30, lo30, hi30)) {
    errors.push({ field: "n30", message: `30 kW ports must be an integer in [${lo30}, ${hi30}]` });
  }
  return errors;
}

export function validatePolicies(values: PolicyFormValues): FieldError[] {
  const errors: FieldError[] = [];
  if (!Number.isFinite(values.idle_fee_rate_vnd_per_min) || values.idle_fee_rate_vnd_per_min < 0) {
    errors.push({ field: "idle_fee_rate_vnd_per_min", message: "fee rate must be >= 0" });
  }
  if (!Number.isInteger(values.idle_grace_minutes) || values.idle_grace_minutes < 0) {
    errors.push({ field: "idle_grace_minutes", message: "grace minutes must be an integer >= 0" });
  }
  return errors;
}

export function validateSpeed(speed: number): FieldError[] {
  if (!(SPEED_CHOICES as readonly number[]).includes(speed)) {
    return [{ field: "speed", message: `speed must be one of ${SPEED_CHOICES.join(", ")}` }];
  }
  return [];
}

export function validateStep(n: number): FieldError[] {
  if (!Number.isInteger(n) || n < 1 || n > 2880) {
    return [{ field: "step", message: "step count must be an integer in [1, 2880]" }];
  }
  return [];
}
