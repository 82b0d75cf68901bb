/** Bounded (tick, value) series for the KPI charts. Points arrive keyed by
 * tick; re-delivery of an already-seen tick is ignored so reconnect resyncs
 * never duplicate chart points. */
export class TickSeries {
  readonly capacity: number;
  private ticks: number[] = [];
  private values: number[] = [];

  constructor(capacity: number) {
    if (capacity < 1) throw new Error("capacity must be >= 1");
    this.capacity = capacity;
  }

  get length(): number {
    return this.ticks.length;
  }

  lastTick(): number {
    return this.ticks.length ? this.ticks[this.ticks.length - 1] : -1;
  }

  /** Returns true when the point was accepted (strictly increasing ticks). */
  push(tick: number, value: number): boolean {
    if (tick <= this.lastTick()) return false;
    this.ticks.push(tick);
    this.values.push(value);
    if (this.ticks.length > this.capacity) {
      this.ticks.shift();
      this.values.shift();
    }
    return true;
  }

  clear(): void {
    this.ticks = [];
    this.values = [];
  }

  points(): Array<[number, number]> {
    return this.ticks.map((t, i) => [t, this.values[i]]);
  }

  valueRange(): [number, number] {
    if (!this.values.length) return [0, 1];
    let lo = this.values[0];
    let hi = this.values[0];
    for (const v of this.values) {
      if (v < lo) lo = v;
      if (v > hi) hi = v;
    }
    return [lo, hi];
  }
}
