/**
 * Dashboard wiring: attach to the steering server, render the live view,
 * submit commands. All display state flows through the pure view model.
 */

import "./styles.css";
import { SteeringClient } from "./client";
import { validateParam, type RunMeta } from "./protocol";
import {
  applyAck,
  buildViewModel,
  initialSession,
  markLocalRejection,
  markPending,
  pushFrame,
  type SessionState,
  type ViewModel,
} from "./viewmodel";
import { histogramSvg, tailSvg, trendSvg } from "./charts";

const SERVER = (import.meta as { env?: Record<string, string> }).env?.VITE_SERVER_URL ?? "";
const FRAME_EVERY = 10;

const client = new SteeringClient(SERVER);
let state: SessionState = initialSession({}, {});
let token: string | null = null;
let meta: RunMeta | null = null;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function render(): void {
  const vm: ViewModel = buildViewModel(state);
  el("tick").textContent = `tick ${vm.tick}`;
  el("run-state").textContent = vm.runState;
  el("connection").textContent = vm.connection;
  el("connection").className = `status status-${vm.connection}`;
  el("attacks").textContent = `${vm.attacksTotal} attacks / ${vm.deathsTotal} deaths in view`;
  const warning = el("warning");
  warning.textContent = vm.warning ?? "";
  warning.hidden = vm.warning === null;
  el("polarization").textContent =
    vm.polarization === null ? "-" : vm.polarization.toFixed(3);
  el("histogram").innerHTML = histogramSvg(vm.histogram);
  el("tail").innerHTML = tailSvg(vm.tail);
  el("trend").innerHTML = trendSvg(vm.polarizationTrend);
  renderPanel(vm);
}

function renderPanel(vm: ViewModel): void {
  const panel = el("params");
  for (const param of vm.params) {
    let row = document.getElementById(`param-${param.key}`);
    if (!row) {
      row = document.createElement("div");
      row.id = `param-${param.key}`;
      row.className = "param-row";
      row.innerHTML =
        `<label>${param.key}</label>` +
        `<input type="range" step="any">` +
        `<input type="number" step="any">` +
        `<span class="param-status"></span>`;
      panel.appendChild(row);
      const slider = row.querySelector<HTMLInputElement>('input[type="range"]')!;
      const box = row.querySelector<HTMLInputElement>('input[type="number"]')!;
      slider.addEventListener("change", () => submitParam(param.key, Number(slider.value)));
      box.addEventListener("change", () => submitParam(param.key, Number(box.value)));
    }
    const slider = row.querySelector<HTMLInputElement>('input[type="range"]')!;
    const box = row.querySelector<HTMLInputElement>('input[type="number"]')!;
    const status = row.querySelector<HTMLSpanElement>(".param-status")!;
    // Slider bounds mirror the server whitelist exactly.
    slider.min = String(param.min);
    slider.max = String(param.max);
    if (document.activeElement !== slider) slider.value = String(param.value);
    if (document.activeElement !== box) box.value = String(param.value);
    if (param.error) {
      status.textContent = param.error;
      status.className = "param-status param-error";
    } else if (param.pending) {
      status.textContent = "pending...";
      status.className = "param-status param-pending";
    } else if (param.appliedAtTick !== undefined) {
      status.textContent = `applied at tick ${param.appliedAtTick}`;
      status.className = "param-status param-ok";
    } else {
      status.textContent = "";
      status.className = "param-status";
    }
  }
}

async function submitParam(key: string, value: number): Promise<void> {
  // Local validation first: out-of-range values never reach the server.
  const verdict = validateParam(key, value, state.ranges);
  if (!verdict.ok) {
    state = markLocalRejection(state, key, verdict.error);
    render();
    return;
  }
  if (!token) return;
  state = markPending(state, key, value);
  render();
  const ack = await client.sendCommand(token, { kind: "set_param", key, value });
  state = applyAck(state, key, ack);
  render();
}

async function submitSimple(kind: "pause" | "resume" | "snapshot_now" | "stop", n?: number): Promise<void> {
  if (!token) return;
  await client.sendCommand(token, n === undefined ? { kind } : { kind: "step", n });
  await refreshRunState();
}

async function refreshRunState(): Promise<void> {
  try {
    meta = await client.fetchMeta();
    state = { ...state, runState: meta.state };
  } catch {
    // keep the previous state; the stream handler tracks connectivity
  }
  render();
}

async function frameLoop(): Promise<void> {
  let attempt = 0;
  for (;;) {
    try {
      state = { ...state, connection: state.frames.length ? "reconnecting" : "connecting" };
      render();
      await client.streamFrames(FRAME_EVERY, (frame) => {
        attempt = 0;
        if (state.connection !== "live") state = { ...state, connection: "live" };
        state = pushFrame(state, frame);
        render();
      });
      state = { ...state, connection: "closed", runState: "done" };
      render();
      return;
    } catch {
      attempt += 1;
      state = { ...state, connection: "reconnecting" };
      render();
      await new Promise((resolve) => setTimeout(resolve, Math.min(5000, 250 * attempt)));
    }
  }
}

async function start(): Promise<void> {
  meta = await client.fetchMeta();
  state = initialSession(meta.ranges, meta.params);
  state = { ...state, runState: meta.state };
  try {
    token = await client.attach("controller");
    el("controls").classList.remove("observer-only");
  } catch {
    token = null; // another controller exists: observe only
    el("controls").classList.add("observer-only");
  }
  el("btn-pause").addEventListener("click", () => void submitSimple("pause"));
  el("btn-resume").addEventListener("click", () => void submitSimple("resume"));
  el("btn-step").addEventListener("click", () => void submitSimple("pause", 10));
  el("btn-snapshot").addEventListener("click", () => void submitSimple("snapshot_now"));
  el("btn-stop").addEventListener("click", () => void submitSimple("stop"));
  render();
  void frameLoop();
  setInterval(() => void refreshRunState(), 2000);
}

window.addEventListener("load", () => void start());
