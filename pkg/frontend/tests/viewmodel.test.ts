/**
 * Golden view-model test: replay the recorded fixture frame log and compare
 * the view model after each frame against committed golden snapshots.
 *
 * The fixture was recorded with:
 *   socsynth run --config fixtures/fixture.config --out /tmp/fixture_run \
 *     --frames-out fixtures/steering_frames.jsonl --frames-every 50
 * Regenerate goldens with: npm run gen:goldens
 */

import { mkdirSync, readFileSync, writeFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";

import type { LiveFrame } from "../src/protocol";
import {
  applyAck,
  buildViewModel,
  initialSession,
  markPending,
  pushFrame,
  tailCurve,
  type SessionState,
} from "../src/viewmodel";

const here = dirname(fileURLToPath(import.meta.url));
const fixtureDir = join(here, "..", "fixtures");
const goldenDir = join(fixtureDir, "goldens");

function loadFrames(): LiveFrame[] {
  const raw = readFileSync(join(fixtureDir, "steering_frames.jsonl"), "utf-8");
  return raw
    .split("\n")
    .filter((line) => line.trim() !== "")
    .map((line) => JSON.parse(line) as LiveFrame);
}

function replaySession(frames: LiveFrame[]): SessionState[] {
  const ranges: Record<string, [number, number]> = {
    "logistic_scale_s": [1e-9, 1e6],
    "thresholds.terror_pred_threshold": [1e-9, 1e6],
  };
  let state = initialSession(ranges, frames[0]?.params ?? {});
  state = { ...state, connection: "live", runState: "running" };
  const states: SessionState[] = [];
  for (const frame of frames) {
    state = pushFrame(state, frame);
    states.push(state);
  }
  return states;
}

describe("view model golden replay", () => {
  const frames = loadFrames();
  const states = replaySession(frames);
  const checkpoints = [0, Math.floor(frames.length / 2), frames.length - 1];

  for (const index of checkpoints) {
    it(`matches the golden snapshot after frame ${index + 1}/${frames.length}`, () => {
      const viewModel = buildViewModel(states[index]!);
      const goldenPath = join(goldenDir, `view_model_frame_${index}.json`);
      const rendered = JSON.stringify(viewModel, null, 2) + "\n";
      if (process.env.UPDATE_GOLDENS) {
        mkdirSync(goldenDir, { recursive: true });
        writeFileSync(goldenPath, rendered);
      }
      const golden = readFileSync(goldenPath, "utf-8");
      expect(JSON.parse(rendered)).toEqual(JSON.parse(golden));
    });
  }

  it("keeps the displayed tick monotone across the whole replay", () => {
    let last = -1;
    for (const state of states) {
      const vm = buildViewModel(state);
      expect(vm.tick).toBeGreaterThan(last);
      last = vm.tick;
    }
  });

  it("ignores out-of-order frames and surfaces a warning", () => {
    const lastState = states[states.length - 1]!;
    const stale = { ...frames[0]!, tick: 1 };
    const next = pushFrame(lastState, stale);
    expect(buildViewModel(next).tick).toBe(buildViewModel(lastState).tick);
    expect(buildViewModel(next).warning).toMatch(/out-of-order/);
  });

  it("warns when the rolling buffer overflows instead of dropping silently", () => {
    let state = initialSession({}, {}, 4);
    state = { ...state, connection: "live" };
    for (const frame of frames) state = pushFrame(state, frame);
    const vm = buildViewModel(state);
    expect(state.frames.length).toBe(4);
    expect(vm.warning).toMatch(/rolled out/);
  });
});

describe("view model pieces", () => {
  it("computes the survival tail curve", () => {
    expect(tailCurve([0, 0, 3, 1, 3, 9])).toEqual([
      { toll: 0, atLeast: 6 },
      { toll: 1, atLeast: 4 },
      { toll: 3, atLeast: 3 },
      { toll: 9, atLeast: 1 },
    ]);
    expect(tailCurve([])).toEqual([]);
  });

  it("tracks pending parameter changes through acknowledgement", () => {
    let state = initialSession({ "logistic_scale_s": [1e-9, 1e6] }, { "logistic_scale_s": 10 });
    state = markPending(state, "logistic_scale_s", 4);
    expect(buildViewModel(state).params[0]).toMatchObject({ pending: true, value: 4 });
    state = applyAck(state, "logistic_scale_s", {
      v: 1,
      ok: true,
      value: 4,
      applies_from_tick: 38,
    });
    expect(buildViewModel(state).params[0]).toMatchObject({
      pending: false,
      value: 4,
      appliedAtTick: 38,
    });
  });

  it("shows server rejection reasons verbatim", () => {
    let state = initialSession({ "death_toll.p0": [0, 1] }, { "death_toll.p0": 0.85 });
    state = markPending(state, "death_toll.p0", 0.9);
    state = applyAck(state, "death_toll.p0", {
      v: 1,
      ok: false,
      error: "value 0.9 for 'death_toll.p0' outside allowed range [0, 1]",
    });
    expect(buildViewModel(state).params[0]!.error).toBe(
      "value 0.9 for 'death_toll.p0' outside allowed range [0, 1]",
    );
  });
});
