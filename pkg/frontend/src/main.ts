import { TwinApi } from "./api.js";
import { LineChart, formatValue } from "./charts.js";
import { ControlPanel } from "./controls.js";
import { SiteMap } from "./map.js";
import { SessionViewModel } from "./model.js";
import { StreamClient } from "./stream.js";
import { PORT_LIMITS } from "./validate.js";

const DEFAULT_SCENARIO = {
  schema_version: 1,
  nb_electrical: 50,
  nb_gasoline: 30,
  rng_seed: 7,
  areas: [
    { area_id: "C-Parking", n_ports_11kw: 20, n_ports_30kw: 4 },
    { area_id: "J-Parking", n_ports_11kw: 15, n_ports_30kw: 4 },
  ],
  energy: { pv: { nb_solar: 500 } },
};

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

async function boot(): Promise<void> {
  const api = new TwinApi("");
  const model = new SessionViewModel();
  const status = el<HTMLElement>("status-line");
  const banner = el<HTMLElement>("banner");
  const errors = el<HTMLElement>("form-errors");
  const ack = el<HTMLElement>("ack-line");

  const params = new URLSearchParams(location.search);
  let sessionId = params.get("session");
  if (!sessionId) {
    sessionId = await api.createSession(DEFAULT_SCENARIO);
    const url = new URL(location.href);
    url.searchParams.set("session", sessionId);
    history.replaceState(null, "", url);
  }

  const site = await api.site();
  const map = new SiteMap(el<HTMLCanvasElement>("map"), site);

  const ratioChart = new LineChart(el<HTMLCanvasElement>("chart-ratios"), "ratios", [0, 1.02])
    .addTrace(model.satisfaction, "#f2c11e", "satisfaction")
    .addTrace(model.selfSufficiency, "#36c26e", "self-suff")
    .addTrace(model.selfConsumption, "#4a90d9", "self-cons");
  const energyChart = new LineChart(el<HTMLCanvasElement>("chart-energy"), "energy kWh")
    .addTrace(model.renewableKwh, "#36c26e", "renewable")
    .addTrace(model.gridKwh, "#e07a5f", "grid");
  const feeChart = new LineChart(el<HTMLCanvasElement>("chart-fees"), "fees VND")
    .addTrace(model.feeRevenue, "#c7a948", "revenue");

  const panel = new ControlPanel({
    api,
    sessionId,
    model,
    showErrors: (errs) => {
      errors.textContent = errs.map((e) => `${e.field}: ${e.message}`).join("; ");
    },
    showAck: (tick) => {
      errors.textContent = "";
      ack.textContent = `applied at tick ${tick}`;
    },
    setBusy: (busy) => {
      document
        .querySelectorAll<HTMLButtonElement>("#controls button, #controls input, #controls select")
        .forEach((b) => (b.disabled = busy));
    },
  });

  let frameQueued = false;
  const redraw = () => {
    if (frameQueued) return;
    frameQueued = true;
    requestAnimationFrame(() => {
      frameQueued = false;
      map.render(model);
      ratioChart.render();
      energyChart.render();
      feeChart.render();
      const k = model.kpi;
      status.textContent =
        `${model.clockLabel()}  tick ${model.tick}  ${model.mode}` +
        `  vehicles ${model.vehicles.size} (${model.chargingCount()} charging,` +
        ` queue ${model.queueLen})` +
        (k
          ? `  satisfied ${k.satisfied}/${k.requested}` +
            `  bess ${formatValue(k.bess_soc_kwh)} kWh`
          : "");
      banner.hidden = model.connection === "live" || model.connection === "ended";
      banner.textContent =
        model.connection === "reconnecting" ? "connection lost - resyncing" : "";
      if (model.connection === "ended") {
        banner.hidden = false;
        banner.textContent = "session ended (horizon reached)";
      }
    });
  };
  model.onChange(redraw);

  const stream = new StreamClient(api.streamUrl(sessionId), {
    onMessage: (msg) => model.apply(msg),
    onStateChange: (state) => {
      if (state === "reconnecting") {
        model.connection = "reconnecting";
        redraw();
      }
    },
  });
  stream.connect();

  el<HTMLButtonElement>("btn-start").onclick = () =>
    panel.start(Number(el<HTMLSelectElement>("speed").value));
  el<HTMLButtonElement>("btn-pause").onclick = () => panel.pause();
  el<HTMLButtonElement>("btn-step").onclick = () =>
    panel.step(Number(el<HTMLInputElement>("step-n").value));
  el<HTMLButtonElement>("btn-reset").onclick = () => panel.reset();

  el<HTMLButtonElement>("btn-ports").onclick = () =>
    panel.applyPorts({
      area: el<HTMLSelectElement>("port-area").value,
      n11: Number(el<HTMLInputElement>("port-n11").value),
      n30: Number(el<HTMLInputElement>("port-n30").value),
    });

  el<HTMLButtonElement>("btn-policies").onclick = () =>
    panel.applyPolicies({
      ban_gasoline: el<HTMLInputElement>("pol-ban").checked,
      idle_fee: el<HTMLInputElement>("pol-fee").checked,
      relocate_full: el<HTMLInputElement>("pol-relocate").checked,
      notification: el<HTMLInputElement>("pol-notify").checked,
      idle_fee_rate_vnd_per_min: Number(el<HTMLInputElement>("pol-rate").value),
      idle_grace_minutes: Number(el<HTMLInputElement>("pol-grace").value),
    });

  const n11 = el<HTMLInputElement>("port-n11");
  const n30 = el<HTMLInputElement>("port-n30");
  [n11.min, n11.max] = PORT_LIMITS.n11.map(String) as [string, string];
  [n30.min, n30.max] = PORT_LIMITS.n30.map(String) as [string, string];

  redraw();
}

boot().catch((err) => {
  const banner = document.getElementById("banner");
  if (banner) {
    banner.hidden = false;
    banner.textContent = `failed to start: ${err}`;
  }
  console.error(err);
});
