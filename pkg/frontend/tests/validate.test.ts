import { describe, expect, it } from "vitest";

import {
  validatePolicies,
  validatePorts,
  validateSpeed,
  validateStep,
} from "../src/validate.js";

describe("validatePorts", () => {
  it("accepts in-range values", () => {
    expect(validatePorts({ area: "C-Parking", n11: 20, n30: 4 })).toEqual([]);
    expect(validatePorts({ area: "J-Parking", n11: 0, n30: 0 })).toEqual([]);
    expect(validatePorts({ area: "C-Parking", n11: 50, n30: 10 })).toEqual([]);
  });

  it("blocks 30 kW count above 10", () => {
    const errors = validatePorts({ area: "C-Parking", n11: 20, n30: 12 });
    expect(errors).toHaveLength(1);
    expect(errors[0].field).toBe("n30");
    expect(errors[0].message).toContain("[0, 10]");
  });

  it("blocks 11 kW count above 50 and non-integers", () => {
    expect(validatePorts({ area: "C", n11: 51, n30: 2 })[0].field).toBe("n11");
    expect(validatePorts({ area: "C", n11: 20.5, n30: 2 })[0].field).toBe("n11");
    expect(validatePorts({ area: "C", n11: -1, n30: 2 })[0].field).toBe("n11");
  });

  it("requires an area", () => {
    expect(validatePorts({ area: "", n11: 10, n30: 2 })[0].field).toBe("area");
  });
});

describe("validatePolicies", () => {
  const base = {
    ban_gasoline: true,
    idle_fee: true,
    relocate_full: false,
    notification: true,
    idle_fee_rate_vnd_per_min: 1000,
    idle_grace_minutes: 30,
  };

  it("accepts defaults", () => {
    expect(validatePolicies(base)).toEqual([]);
  });

  it("rejects negative rate and grace", () => {
    expect(validatePolicies({ ...base, idle_fee_rate_vnd_per_min: -1 })).toHaveLength(1);
    expect(validatePolicies({ ...base, idle_grace_minutes: -5 })).toHaveLength(1);
  });
});

describe("validateSpeed / validateStep", () => {
  it("only the four server speeds pass", () => {
    for (const ok of [1, 6, 12, 60]) expect(validateSpeed(ok)).toEqual([]);
    expect(validateSpeed(7)).toHaveLength(1);
    expect(validateSpeed(0)).toHaveLength(1);
  });

  it("step bounds", () => {
    expect(validateStep(1)).toEqual([]);
    expect(validateStep(288)).toEqual([]);
    expect(validateStep(0)).toHaveLength(1);
    expect(validateStep(3.5)).toHaveLength(1);
  });
});
