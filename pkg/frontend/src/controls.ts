import { ApiError, TwinApi } from "./api.js";
import type { SessionViewModel } from "./model.js";
import type { ControlCommand } from "./types.js";
import {
  validatePolicies,
  validatePorts,
  validateSpeed,
  validateStep,
  type FieldError,
  type PolicyFormValues,
  type PortFormValues,
} from "./validate.js";

export interface ControlsDeps {
  api: TwinApi;
  sessionId: string;
  model: SessionViewModel;
  /** DOM-free sinks so the logic is testable headless. */
  showErrors(errors: FieldError[]): void;
  showAck(tick: number): void;
  setBusy(busy: boolean): void;
}

/** Form-to-command mediator: validates client-side first (a violation never
 * reaches the network), disables inputs while a command is in flight, and
 * surfaces the server's applied_at_tick ack. */
export class ControlPanel {
  constructor(private readonly deps: ControlsDeps) {}

  private async send(command: ControlCommand): Promise<number | null> {
    const { api, sessionId, model, showAck, showErrors, setBusy } = this.deps;
    model.pendingCommand = true;
    setBusy(true);
    try {
      const ack = await api.control(sessionId, command);
      showAck(ack.applied_at_tick);
      if (ack.mode) model.mode = ack.mode;
      if (ack.speed) model.speed = ack.speed;
      return ack.applied_at_tick;
    } catch (err) {
      if (err instanceof ApiError) {
        showErrors([{ field: "server", message: err.message }]);
      } else {
        showErrors([{ field: "network", message: String(err) }]);
      }
      return null;
    } finally {
      model.pendingCommand = false;
      setBusy(false);
    }
  }

  async start(speed: number): Promise<number | null> {
    const errors = validateSpeed(speed);
    if (errors.length) {
      this.deps.showErrors(errors);
      return null;
    }
    return this.send({ kind: "start", speed });
  }

  async pause(): Promise<number | null> {
    return this.send({ kind: "pause" });
  }

  async step(n: number): Promise<number | null> {
    const errors = validateStep(n);
    if (errors.length) {
      this.deps.showErrors(errors);
      return null;
    }
    return this.send({ kind: "step", n });
  }

  async reset(seed?: number): Promise<number | null> {
    return this.send({ kind: "reset", ...(seed === undefined ? {} : { seed }) });
  }

  /** Returns null without any request when client-side validation fails. */
  async applyPorts(values: PortFormValues): Promise<number | null> {
    const errors = validatePorts(values);
    if (errors.length) {
      this.deps.showErrors(errors);
      return null;
    }
    return this.send({
      kind: "set_ports",
      area: values.area,
      n11: values.n11,
      n30: values.n30,
    });
  }

  async applyPolicies(values: PolicyFormValues): Promise<number | null> {
    const errors = validatePolicies(values);
    if (errors.length) {
      this.deps.showErrors(errors);
      return null;
    }
    return this.send({
      kind: "set_policies",
      policies: {
        ban_gasoline: values.ban_gasoline,
        idle_fee: values.idle_fee,
        relocate_full: values.relocate_full,
        notification: values.notification,
        idle_fee_rate_vnd_per_min: values.idle_fee_rate_vnd_per_min,
        idle_grace_minutes: values.idle_grace_minutes,
      },
    });
  }
}
