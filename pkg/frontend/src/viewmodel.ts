/**
 * The session view model.
 *
 * All rendering state derives from (frame buffer, panel state) through the
 * pure function buildViewModel, which makes the whole view snapshot-testable:
 * feed recorded frames in, compare the resulting view models against golden
 * files. Nothing here touches the DOM or the network.
 */

import type { CommandAck, LiveFrame } from "./protocol";

export type ConnectionState = "connecting" | "live" | "reconnecting" | "closed";

export interface ParamPanelEntry {
  value: number;
  pending: boolean;
  appliedAtTick?: number;
  error?: string;
}

export interface SessionState {
  connection: ConnectionState;
  frames: LiveFrame[];
  maxFrames: number;
  /** Frames dropped from the rolling buffer; surfaces as a visible warning. */
  rolledOff: number;
  /** Out-of-order frames ignored to keep the displayed tick monotone. */
  outOfOrder: number;
  panel: Record<string, ParamPanelEntry>;
  ranges: Record<string, [number, number]>;
  runState: string;
}

export function initialSession(
  ranges: Record<string, [number, number]>,
  params: Record<string, number>,
  maxFrames = 256,
): SessionState {
  const panel: Record<string, ParamPanelEntry> = {};
  for (const key of Object.keys(ranges).sort()) {
    panel[key] = { value: params[key] ?? 0, pending: false };
  }
  return {
    connection: "connecting",
    frames: [],
    maxFrames,
    rolledOff: 0,
    outOfOrder: 0,
    panel,
    ranges,
    runState: "starting",
  };
}

/** Append a frame, enforcing tick monotonicity and the bounded buffer. */
export function pushFrame(state: SessionState, frame: LiveFrame): SessionState {
  const last = state.frames[state.frames.length - 1];
  if (last && frame.tick <= last.tick) {
    return { ...state, outOfOrder: state.outOfOrder + 1 };
  }
  const frames = [...state.frames, frame];
  let rolledOff = state.rolledOff;
  while (frames.length > state.maxFrames) {
    frames.shift();
    rolledOff += 1;
  }
  // Acknowledged parameter values are mirrored from the live frame so the
  // panel tracks changes made by other controllers too.
  const panel = { ...state.panel };
  for (const [key, value] of Object.entries(frame.params)) {
    const entry = panel[key];
    if (entry && !entry.pending && entry.error === undefined) {
      panel[key] = { ...entry, value };
    }
  }
  return { ...state, frames, rolledOff, panel };
}

export function markPending(state: SessionState, key: string, value: number): SessionState {
  const entry = state.panel[key] ?? { value, pending: false };
  return {
    ...state,
    panel: { ...state.panel, [key]: { ...entry, value, pending: true, error: undefined } },
  };
}

export function applyAck(state: SessionState, key: string, ack: CommandAck): SessionState {
  const entry = state.panel[key];
  if (!entry) return state;
  const updated: ParamPanelEntry = ack.ok
    ? { value: ack.value ?? entry.value, pending: false, appliedAtTick: ack.applies_from_tick }
    : { ...entry, pending: false, error: ack.error ?? "rejected" };
  return { ...state, panel: { ...state.panel, [key]: updated } };
}

export function markLocalRejection(state: SessionState, key: string, error: string): SessionState {
  const entry = state.panel[key];
  if (!entry) return state;
  return { ...state, panel: { ...state.panel, [key]: { ...entry, pending: false, error } } };
}

// ---------------------------------------------------------------------------

export interface HistogramBar {
  /** Bin center on the signed-predisposition axis. */
  center: number;
  /** Height as a fraction of the fullest bin, in [0, 1]. */
  height: number;
  count: number;
}

export interface TailPoint {
  toll: number;
  /** Number of recorded attacks with at least this death toll. */
  atLeast: number;
}

export interface TrendPoint {
  tick: number;
  value: number;
}

export interface ParamView {
  key: string;
  value: number;
  min: number;
  max: number;
  pending: boolean;
  appliedAtTick?: number;
  error?: string;
}

export interface ViewModel {
  connection: ConnectionState;
  runState: string;
  tick: number;
  warning: string | null;
  histogram: HistogramBar[];
  tail: TailPoint[];
  polarizationTrend: TrendPoint[];
  polarization: number | null;
  attacksTotal: number;
  deathsTotal: number;
  params: ParamView[];
}

/** Survival curve of the death tolls seen so far (the tail chart). */
export function tailCurve(deaths: number[]): TailPoint[] {
  if (deaths.length === 0) return [];
  const sorted = [...deaths].sort((a, b) => a - b);
  const points: TailPoint[] = [];
  let index = 0;
  const unique = [...new Set(sorted)];
  for (const toll of unique) {
    while (index < sorted.length && (sorted[index] as number) < toll) index += 1;
    points.push({ toll, atLeast: sorted.length - index });
  }
  return points;
}

export function buildViewModel(state: SessionState): ViewModel {
  const latest = state.frames[state.frames.length - 1];

  let histogram: HistogramBar[] = [];
  if (latest) {
    const peak = Math.max(1, ...latest.histogram.counts);
    histogram = latest.histogram.counts.map((count, i) => ({
      center: ((latest.histogram.edges[i] ?? 0) + (latest.histogram.edges[i + 1] ?? 0)) / 2,
      height: count / peak,
      count,
    }));
  }

  const allDeaths = state.frames.flatMap((f) => f.deaths);
  const warnings: string[] = [];
  if (state.rolledOff > 0) {
    warnings.push(`${state.rolledOff} frame(s) rolled out of the view buffer`);
  }
  if (state.outOfOrder > 0) {
    warnings.push(`${state.outOfOrder} out-of-order frame(s) ignored`);
  }

  return {
    connection: state.connection,
    runState: state.runState,
    tick: latest?.tick ?? 0,
    warning: warnings.length ? warnings.join("; ") : null,
    histogram,
    tail: tailCurve(allDeaths),
    polarizationTrend: state.frames.map((f) => ({ tick: f.tick, value: f.polarization })),
    polarization: latest?.polarization ?? null,
    attacksTotal: state.frames.reduce((acc, f) => acc + f.attack_count, 0),
    deathsTotal: allDeaths.reduce((acc, d) => acc + d, 0),
    params: Object.keys(state.panel)
      .sort()
      .map((key) => {
        const entry = state.panel[key] as ParamPanelEntry;
        const [min, max] = state.ranges[key] ?? [0, 1];
        return { key, value: entry.value, min, max, pending: entry.pending, appliedAtTick: entry.appliedAtTick, error: entry.error };
      }),
  };
}
