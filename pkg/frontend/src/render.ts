// Canvas drawing. World frame: +x forward, +y left, cm. Screen: robot
// front points up, so screen-x = -world-y, screen-y = -world-x.

import { armTipOffset, ViewModel } from "./model.js";
import type { StateRecord } from "./protocol.js";

const COLORS = {
  background: "#10141a",
  grid: "#1d2430",
  body: "#3d6ea5",
  bodyEdge: "#7fb2e5",
  coneEcho: "rgba(255, 196, 64, 0.35)",
  coneIdle: "rgba(120, 140, 160, 0.12)",
  coneEdge: "rgba(160, 180, 200, 0.35)",
  pedestrian: "#d1556a",
  safeRing: "#3fae6a",
  unsafeRing: "#e04f4f",
  arm: "#ffd24d",
  text: "#cfd8e3",
  strip: "#7fb2e5",
  stripThreshold: "#e04f4f",
};

function worldToScreen(
  cx: number,
  cy: number,
  scale: number,
  originX: number,
  originY: number,
  wx: number,
  wy: number,
): [number, number] {
  return [cx - (wy - originY) * scale, cy - (wx - originX) * scale];
}

export function drawScene(
  ctx: CanvasRenderingContext2D,
  vm: ViewModel,
  width: number,
  height: number,
): void {
  ctx.fillStyle = COLORS.background;
  ctx.fillRect(0, 0, width, height);
  const rec = vm.latest;
  const cfg = vm.config;
  if (!rec || !cfg) {
    return;
  }
  const cx = width / 2;
  const cy = height / 2;
  const scale = Math.min(width, height) / 260; // ~130 cm of world half-span
  const ox = rec.robot.x;
  const oy = rec.robot.y;
  const toScreen = (wx: number, wy: number) =>
    worldToScreen(cx, cy, scale, ox, oy, wx, wy);

  // Light range grid every 50 cm around the robot.
  ctx.strokeStyle = COLORS.grid;
  ctx.lineWidth = 1;
  for (let r = 50; r <= 150; r += 50) {
    ctx.beginPath();
    ctx.arc(cx, cy, r * scale, 0, 2 * Math.PI);
    ctx.stroke();
  }

  // Safe-distance ring: style flips exactly at the threshold.
  const unsafe = rec.dist_cm < cfg.safe_distance_cm;
  ctx.strokeStyle = unsafe ? COLORS.unsafeRing : COLORS.safeRing;
  ctx.lineWidth = 2;
  ctx.setLineDash(unsafe ? [6, 4] : []);
  ctx.beginPath();
  ctx.arc(cx, cy, cfg.safe_distance_cm * scale, 0, 2 * Math.PI);
  ctx.stroke();
  ctx.setLineDash([]);

  // Sensor cones, shaded when they report an echo (length = reading).
  const half = (cfg.beam_half_angle_deg * Math.PI) / 180;
  for (let i = 0; i < cfg.sensor_count; i++) {
    const axis = rec.robot.heading + (i * 2 * Math.PI) / cfg.sensor_count;
    const mx = rec.robot.x + cfg.mount_radius_cm * Math.cos(axis);
    const my = rec.robot.y + cfg.mount_radius_cm * Math.sin(axis);
    const reading = rec.readings[i] ?? null;
    const reach = reading !== null ? reading : 70;
    const [sx, sy] = toScreen(mx, my);
    const a0 = axis - half;
    const a1 = axis + half;
    ctx.beginPath();
    ctx.moveTo(sx, sy);
    for (const a of [a0, a1]) {
      const [ex, ey] = toScreen(mx + reach * Math.cos(a), my + reach * Math.sin(a));
      ctx.lineTo(ex, ey);
      if (a === a0) {
        ctx.moveTo(sx, sy);
      }
    }
    ctx.closePath();
    ctx.fillStyle = reading !== null ? COLORS.coneEcho : COLORS.coneIdle;
    ctx.fill();
    ctx.strokeStyle = COLORS.coneEdge;
    ctx.lineWidth = 1;
    ctx.stroke();
  }

  // Base disc and heading mark.
  ctx.beginPath();
  ctx.arc(cx, cy, (cfg.body_diameter_cm / 2) * scale, 0, 2 * Math.PI);
  ctx.fillStyle = COLORS.body;
  ctx.fill();
  ctx.strokeStyle = COLORS.bodyEdge;
  ctx.lineWidth = 2;
  ctx.stroke();
  const [hx, hy] = toScreen(
    rec.robot.x + (cfg.body_diameter_cm / 2) * Math.cos(rec.robot.heading),
    rec.robot.y + (cfg.body_diameter_cm / 2) * Math.sin(rec.robot.heading),
  );
  ctx.beginPath();
  ctx.moveTo(cx, cy);
  ctx.lineTo(hx, hy);
  ctx.stroke();

  // Arm reaction arrow (display gain 3x so the lean is visible).
  if (rec.arm.reacting) {
    const tip = armTipOffset(rec.arm.servo1, rec.arm.servo2);
    const [ax, ay] = toScreen(rec.robot.x + tip.x * 3, rec.robot.y + tip.y * 3);
    ctx.strokeStyle = COLORS.arm;
    ctx.lineWidth = 4;
    ctx.beginPath();
    ctx.moveTo(cx, cy);
    ctx.lineTo(ax, ay);
    ctx.stroke();
    ctx.beginPath();
    ctx.arc(ax, ay, 5, 0, 2 * Math.PI);
    ctx.fillStyle = COLORS.arm;
    ctx.fill();
  }

  // Pedestrians.
  for (const ped of rec.pedestrians) {
    const [px, py] = toScreen(ped.x, ped.y);
    ctx.beginPath();
    ctx.arc(px, py, ped.radius * scale, 0, 2 * Math.PI);
    ctx.fillStyle = COLORS.pedestrian;
    ctx.fill();
  }
}

export function drawDistanceStrip(
  ctx: CanvasRenderingContext2D,
  vm: ViewModel,
  width: number,
  height: number,
): void {
  ctx.fillStyle = COLORS.background;
  ctx.fillRect(0, 0, width, height);
  const cfg = vm.config;
  if (!cfg || vm.history.length === 0) {
    return;
  }
  const maxDist = 200;
  const yFor = (d: number) => height - (Math.min(d, maxDist) / maxDist) * (height - 6) - 3;
  // Threshold line.
  ctx.strokeStyle = COLORS.stripThreshold;
  ctx.lineWidth = 1;
  ctx.setLineDash([4, 3]);
  ctx.beginPath();
  ctx.moveTo(0, yFor(cfg.safe_distance_cm));
  ctx.lineTo(width, yFor(cfg.safe_distance_cm));
  ctx.stroke();
  ctx.setLineDash([]);
  // Distance polyline over the retained window.
  const n = vm.history.length;
  ctx.strokeStyle = COLORS.strip;
  ctx.lineWidth = 2;
  ctx.beginPath();
  vm.history.forEach((sample, i) => {
    const x = (i / Math.max(1, n - 1)) * width;
    const y = yFor(sample.dist_cm);
    if (i === 0) {
      ctx.moveTo(x, y);
    } else {
      ctx.lineTo(x, y);
    }
  });
  ctx.stroke();
}

export function describeState(vm: ViewModel): string[] {
  const m = vm.metrics;
  const lines = [
    `tick ${vm.tick}  policy ${vm.policy}${vm.paused ? "  [paused]" : ""}`,
  ];
  const rec: StateRecord | null = vm.latest;
  if (rec) {
    const d = vm.distanceReadout();
    lines.push(`distance ${d === null ? "n/a" : d.toFixed(1)} cm`);
    lines.push(`arm ${rec.arm.reacting ? `reacting (${rec.arm.servo1}, ${rec.arm.servo2})` : "neutral"}`);
    lines.push(`base ${rec.command.base ?? "holding"}`);
  }
  if (m) {
    lines.push(
      `min ${m.min_distance_cm === null ? "n/a" : m.min_distance_cm.toFixed(1)} cm` +
        `  unsafe ${m.unsafe_dwell_ms} ms  missed ${m.missed_detections}  contacts ${m.violations}`,
    );
  }
  return lines;
}
