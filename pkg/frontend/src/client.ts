/**
 * HTTP/SSE client for the steering server.
 *
 * Frames stream over fetch + ReadableStream rather than EventSource so the
 * same parser runs in the browser and under vitest's node environment. The
 * UI never mutates simulation state except through submitted commands.
 */

import type { Command, CommandAck, LiveFrame, RunMeta } from "./protocol";

export class SteeringClient {
  constructor(readonly baseUrl: string) {}

  async fetchMeta(): Promise<RunMeta> {
    const response = await fetch(`${this.baseUrl}/api/meta`);
    if (!response.ok) throw new Error(`meta request failed: ${response.status}`);
    return (await response.json()) as RunMeta;
  }

  async attach(role: "controller" | "observer"): Promise<string> {
    const response = await fetch(`${this.baseUrl}/api/attach`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ role }),
    });
    const body = (await response.json()) as { ok: boolean; token?: string; error?: string };
    if (!response.ok || !body.ok || !body.token) {
      throw new Error(body.error ?? `attach failed: ${response.status}`);
    }
    return body.token;
  }

  async sendCommand(token: string, command: Command): Promise<CommandAck> {
    const response = await fetch(`${this.baseUrl}/api/command`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ token, ...command }),
    });
    return (await response.json()) as CommandAck;
  }

  /**
   * Stream LiveFrames; resolves when the stream ends cleanly, throws on
   * transport errors (callers reconnect).
   */
  async streamFrames(
    every: number,
    onFrame: (frame: LiveFrame) => void,
    signal?: AbortSignal,
  ): Promise<void> {
    const response = await fetch(`${this.baseUrl}/api/frames?every=${every}`, { signal });
    if (!response.ok || !response.body) {
      throw new Error(`frame stream failed: ${response.status}`);
    }
    for await (const message of sseMessages(response.body)) {
      if (message.event === "end") return;
      if (message.data) {
        const frame = JSON.parse(message.data) as LiveFrame;
        if (frame && frame.type === "frame") onFrame(frame);
      }
    }
  }
}

export interface SseMessage {
  event: string | null;
  data: string;
}

/** Minimal text/event-stream parser over a byte stream. */
export async function* sseMessages(body: ReadableStream<Uint8Array>): AsyncGenerator<SseMessage> {
  const decoder = new TextDecoder();
  const reader = body.getReader();
  let buffer = "";
  try {
    while (true) {
      const { done, value } = await reader.read();
      if (done) break;
      buffer += decoder.decode(value, { stream: true });
      let boundary = buffer.indexOf("\n\n");
      while (boundary >= 0) {
        const raw = buffer.slice(0, boundary);
        buffer = buffer.slice(boundary + 2);
        const message = parseSseMessage(raw);
        if (message) yield message;
        boundary = buffer.indexOf("\n\n");
      }
    }
  } finally {
    reader.releaseLock();
  }
}

export function parseSseMessage(raw: string): SseMessage | null {
  let event: string | null = null;
  const data: string[] = [];
  for (const line of raw.split("\n")) {
    if (line.startsWith("data: ")) data.push(line.slice(6));
    else if (line.startsWith("data:")) data.push(line.slice(5));
    else if (line.startsWith("event: ")) event = line.slice(7);
    else if (line.startsWith("event:")) event = line.slice(6);
  }
  if (event === null && data.length === 0) return null;
  return { event, data: data.join("\n") };
}
