import { describe, expect, it, vi } from "vitest";

import { ApiError, TwinApi } from "../src/api.js";
import { ControlPanel } from "../src/controls.js";
import { SessionViewModel } from "../src/model.js";
import type { ControlCommand } from "../src/types.js";

function makePanel(controlImpl?: (cmd: ControlCommand) => Promise<{ applied_at_tick: number }>) {
  const sent: ControlCommand[] = [];
  const api = new TwinApi("");
  api.control = vi.fn(async (_sid: string, cmd: ControlCommand) => {
    sent.push(cmd);
    if (controlImpl) return controlImpl(cmd);
    return { applied_at_tick: 42 };
  }) as typeof api.control;
  const model = new SessionViewModel();
  const errors: string[] = [];
  const acks: number[] = [];
  const busyStates: boolean[] = [];
  const panel = new ControlPanel({
    api,
    sessionId: "s1",
    model,
    showErrors: (errs) => errors.push(...errs.map((e) => `${e.field}:${e.message}`)),
    showAck: (tick) => acks.push(tick),
    setBusy: (b) => busyStates.push(b),
  });
  return { panel, sent, errors, acks, busyStates, model };
}

describe("ControlPanel", () => {
  it("blocks out-of-bound port counts before any request", async () => {
    const { panel, sent, errors } = makePanel();
    const result = await panel.applyPorts({ area: "C-Parking", n11: 20, n30: 12 });
    expect(result).toBeNull();
    expect(sent).toHaveLength(0); // nothing hit the network
    expect(errors.some((e) => e.startsWith("n30:"))).toBe(true);
  });

  it("sends valid port changes and surfaces the ack tick", async () => {
    const { panel, sent, acks } = makePanel();
    const tick = await panel.applyPorts({ area: "C-Parking", n11: 25, n30: 6 });
    expect(tick).toBe(42);
    expect(sent).toEqual([{ kind: "set_ports", area: "C-Parking", n11: 25, n30: 6 }]);
    expect(acks).toEqual([42]);
  });

  it("disables inputs while a command is in flight", async () => {
    const { panel, busyStates, model } = makePanel(async () => {
      expect(model.pendingCommand).toBe(true);
      return { applied_at_tick: 7 };
    });
    await panel.pause();
    expect(busyStates).toEqual([true, false]);
    expect(model.pendingCommand).toBe(false);
  });

  it("maps server 400s to inline errors", async () => {
    const { panel, errors } = makePanel(async () => {
      throw new ApiError(400, "n30 must be in [0, 10], got 11");
    });
    const result = await panel.applyPorts({ area: "C-Parking", n11: 20, n30: 10 });
    expect(result).toBeNull();
    expect(errors.some((e) => e.includes("n30 must be in"))).toBe(true);
  });

  it("validates speed and step counts client-side", async () => {
    const { panel, sent } = makePanel();
    expect(await panel.start(7)).toBeNull();
    expect(await panel.step(0)).toBeNull();
    expect(sent).toHaveLength(0);
    expect(await panel.start(60)).toBe(42);
    expect(await panel.step(12)).toBe(42);
    expect(sent).toHaveLength(2);
  });

  it("policy form round-trips", async () => {
    const { panel, sent } = makePanel();
    await panel.applyPolicies({
      ban_gasoline: true,
      idle_fee: true,
      relocate_full: false,
      notification: true,
      idle_fee_rate_vnd_per_min: 1000,
      idle_grace_minutes: 30,
    });
    expect(sent[0].kind).toBe("set_policies");
    const payload = (sent[0] as Extract<ControlCommand, { kind: "set_policies" }>).policies;
    expect(payload.notification).toBe(true);
    expect(payload.idle_grace_minutes).toBe(30);
  });
});
