// View model: the single state store behind the UI. It renders only
// server-confirmed state (no client-side prediction) and never
// recomputes quantities the server already reports.

import type { BenchConfig, ClientMsg, Metrics, ServerMsg, StateRecord } from "./protocol.js";

export type ConnectionStatus = "connecting" | "connected" | "disconnected";

export interface DistanceSample {
  t_ms: number;
  dist_cm: number;
}

const DEFAULT_HISTORY_LIMIT = 600;

export class ViewModel {
  status: ConnectionStatus = "connecting";
  config: BenchConfig | null = null;
  tickMs = 50;
  maxSteer = 150;
  readOnly = false;
  policy = "alg1";
  paused = false;
  tick = 0;
  latest: StateRecord | null = null;
  metrics: Metrics | null = null;
  errorBanner: string | null = null;
  readonly history: DistanceSample[] = [];
  private readonly historyLimit: number;
  // Currently pressed direction keys; +x is up-screen = robot front.
  readonly activeKeys = new Set<string>();

  constructor(historyLimit: number = DEFAULT_HISTORY_LIMIT) {
    this.historyLimit = historyLimit;
  }

  /** Latest server-reported distance; the UI must show exactly this. */
  distanceReadout(): number | null {
    return this.latest === null ? null : this.latest.dist_cm;
  }

  /** Parse and apply one incoming frame; malformed input sets the banner. */
  applyRaw(raw: string): void {
    let msg: ServerMsg;
    try {
      msg = JSON.parse(raw) as ServerMsg;
    } catch {
      this.errorBanner = "malformed server frame";
      return;
    }
    if (!msg || typeof msg !== "object" || typeof (msg as { type?: unknown }).type !== "string") {
      this.errorBanner = "malformed server frame";
      return;
    }
    this.apply(msg);
  }

  apply(msg: ServerMsg): void {
    switch (msg.type) {
      case "hello":
        this.config = msg.config;
        this.tickMs = msg.tick_ms;
        this.maxSteer = msg.max_steer_cm_s;
        this.readOnly = msg.read_only;
        this.policy = msg.policy;
        this.tick = msg.tick;
        this.latest = msg.world;
        this.status = "connected";
        break;
      case "state": {
        const rec = msg.record;
        if (!rec || typeof rec.dist_cm !== "number") {
          this.errorBanner = "malformed state record";
          return;
        }
        this.tick = msg.tick;
        this.paused = msg.paused;
        this.policy = msg.policy;
        this.latest = rec;
        this.metrics = msg.metrics;
        this.pushHistory({ t_ms: rec.t_ms, dist_cm: rec.dist_cm });
        break;
      }
      case "error":
        this.errorBanner = msg.message;
        break;
    }
  }

  private pushHistory(sample: DistanceSample): void {
    const last = this.history[this.history.length - 1];
    if (last !== undefined && last.t_ms === sample.t_ms) {
      return; // pause/reset rebroadcasts of the same instant
    }
    this.history.push(sample);
    if (this.history.length > this.historyLimit) {
      this.history.splice(0, this.history.length - this.historyLimit);
    }
  }

  markDisconnected(): void {
    this.status = "disconnected";
  }

  clearOnReset(): void {
    this.history.length = 0;
  }

  keyDown(key: string): void {
    this.activeKeys.add(key);
  }

  keyUp(key: string): void {
    this.activeKeys.delete(key);
  }

  releaseInput(): void {
    this.activeKeys.clear();
  }

  /** Velocity vector for the current key set, clamped to the steer limit. */
  steerVector(): { vx: number; vy: number } {
    let vx = 0;
    let vy = 0;
    for (const key of this.activeKeys) {
      switch (key) {
        case "ArrowUp":
        case "w":
          vx += 1;
          break;
        case "ArrowDown":
        case "s":
          vx -= 1;
          break;
        case "ArrowLeft":
        case "a":
          vy += 1; // +y is the robot's left
          break;
        case "ArrowRight":
        case "d":
          vy -= 1;
          break;
      }
    }
    return clampSteer(vx * this.maxSteer, vy * this.maxSteer, this.maxSteer);
  }

  steerMessage(vx: number, vy: number): ClientMsg {
    const v = clampSteer(vx, vy, this.maxSteer);
    return { type: "steer", tick: this.tick, vx: v.vx, vy: v.vy };
  }

  controlMessage(type: "pause" | "resume" | "reset"): ClientMsg {
    return { type, tick: this.tick };
  }

  policyMessage(name: string): ClientMsg {
    return { type: "set_policy", tick: this.tick, name };
  }
}

/** Scale a velocity down onto the steer disc; never above the limit. */
export function clampSteer(
  vx: number,
  vy: number,
  limit: number,
): { vx: number; vy: number } {
  const mag = Math.hypot(vx, vy);
  if (mag <= limit || mag === 0) {
    return { vx, vy };
  }
  const k = limit / mag;
  return { vx: vx * k, vy: vy * k };
}

/** Horizontal tip displacement of the arm link, for the reaction arrow. */
export function armTipOffset(
  servo1: number,
  servo2: number,
  linkLength = 21,
): { x: number; y: number } {
  const t1 = ((servo1 - 90) * Math.PI) / 180;
  const t2 = ((servo2 - 90) * Math.PI) / 180;
  return {
    x: linkLength * Math.sin(t2),
    y: -linkLength * Math.sin(t1) * Math.cos(t2),
  };
}
