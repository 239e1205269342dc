/**
 * Wire types for the steering server's versioned protocol (v1).
 *
 * Commands go over POST /api/command; frames arrive as Server-Sent Events,
 * one JSON LiveFrame per message. Parameter ranges come from /api/meta and
 * are the single source of truth for slider bounds and client-side
 * validation.
 */

export const PROTOCOL_VERSION = 1;

export interface HistogramData {
  edges: number[];
  counts: number[];
}

export interface LiveFrame {
  v: number;
  type: "frame";
  tick: number;
  histogram: HistogramData;
  attack_count: number;
  deaths: number[];
  polarization: number;
  params: Record<string, number>;
}

export interface RunMeta {
  v: number;
  state: "starting" | "running" | "paused" | "stepping" | "done";
  tick: number;
  n_ticks: number;
  n_agents: number;
  snapshot_every: number;
  region: string;
  params: Record<string, number>;
  ranges: Record<string, [number, number]>;
  controller_attached: boolean;
}

export type CommandKind = "pause" | "resume" | "step" | "set_param" | "snapshot_now" | "stop";

export interface Command {
  kind: CommandKind;
  n?: number;
  key?: string;
  value?: number;
}

export interface CommandAck {
  v: number;
  ok: boolean;
  state?: string;
  applied_tick?: number;
  applies_from_tick?: number;
  key?: string;
  value?: number;
  error?: string;
  range?: [number, number];
}

/** Client-side mirror of the server's range validation. */
export function validateParam(
  key: string,
  value: number,
  ranges: Record<string, [number, number]>,
): { ok: true } | { ok: false; error: string } {
  const bounds = ranges[key];
  if (!bounds) {
    return { ok: false, error: `parameter '${key}' is not tunable` };
  }
  const [lo, hi] = bounds;
  if (!Number.isFinite(value)) {
    return { ok: false, error: `value for '${key}' must be a finite number` };
  }
  if (value < lo || value > hi) {
    return { ok: false, error: `value ${value} for '${key}' outside allowed range [${lo}, ${hi}]` };
  }
  return { ok: true };
}
