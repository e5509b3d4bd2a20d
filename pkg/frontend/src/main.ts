import { ViewModel } from "./model.js";
import { connectBridge, Bridge } from "./net.js";
import { describeState, drawDistanceStrip, drawScene } from "./render.js";

const params = new URLSearchParams(location.search);
const url = params.get("bridge") ?? `ws://${location.hostname || "127.0.0.1"}:8765`;

const scene = document.getElementById("scene") as HTMLCanvasElement;
const strip = document.getElementById("strip") as HTMLCanvasElement;
const banner = document.getElementById("banner") as HTMLDivElement;
const panel = document.getElementById("panel") as HTMLDivElement;

const vm = new ViewModel();
let bridge: Bridge | null = null;
let steerTimer: number | null = null;
let lastSent = { vx: 0, vy: 0 };
let pointerSteer: { vx: number; vy: number } | null = null;

function connect(): void {
  vm.status = "connecting";
  bridge = connectBridge(
    url,
    (raw) => vm.applyRaw(raw),
    () => {
      vm.markDisconnected();
      if (steerTimer !== null) {
        clearInterval(steerTimer);
        steerTimer = null;
      }
      setTimeout(connect, 1000); // reconnect with a visible banner meanwhile
    },
  );
  if (steerTimer === null) {
    steerTimer = setInterval(sendSteer, 50) as unknown as number;
  }
}

function currentSteer(): { vx: number; vy: number } {
  return pointerSteer ?? vm.steerVector();
}

function sendSteer(): void {
  if (!bridge || vm.status !== "connected") {
    return; // disconnected: inputs are dropped
  }
  const v = currentSteer();
  const changed = v.vx !== lastSent.vx || v.vy !== lastSent.vy;
  const active = v.vx !== 0 || v.vy !== 0;
  // Re-send while held (latest-wins on the server); send the release once.
  if (active || changed) {
    bridge.send(vm.steerMessage(v.vx, v.vy));
    lastSent = v;
  }
}

// Keyboard steering: arrows or WASD.
window.addEventListener("keydown", (ev) => {
  if (["ArrowUp", "ArrowDown", "ArrowLeft", "ArrowRight", "w", "a", "s", "d"].includes(ev.key)) {
    vm.keyDown(ev.key);
    ev.preventDefault();
  }
});
window.addEventListener("keyup", (ev) => {
  vm.keyUp(ev.key);
});
window.addEventListener("blur", () => vm.releaseInput());

// Pointer steering: drag anywhere on the scene; the offset from the
// canvas centre maps to a velocity (screen up = robot front).
scene.addEventListener("pointerdown", (ev) => {
  scene.setPointerCapture(ev.pointerId);
  updatePointer(ev);
});
scene.addEventListener("pointermove", (ev) => {
  if (pointerSteer !== null) {
    updatePointer(ev);
  }
});
scene.addEventListener("pointerup", () => {
  pointerSteer = null;
});

function updatePointer(ev: PointerEvent): void {
  const rect = scene.getBoundingClientRect();
  const dx = ev.clientX - (rect.left + rect.width / 2);
  const dy = ev.clientY - (rect.top + rect.height / 2);
  // screen-x = -world-y, screen-y = -world-x, gain 1 px -> 1 cm/s.
  pointerSteer = { vx: -dy, vy: -dx };
}

function wireButton(id: string, handler: () => void): void {
  (document.getElementById(id) as HTMLButtonElement).addEventListener("click", handler);
}

wireButton("pause", () => bridge?.send(vm.controlMessage("pause")));
wireButton("resume", () => bridge?.send(vm.controlMessage("resume")));
wireButton("reset", () => {
  vm.clearOnReset();
  bridge?.send(vm.controlMessage("reset"));
});
wireButton("alg1", () => bridge?.send(vm.policyMessage("alg1")));
wireButton("alg2", () => bridge?.send(vm.policyMessage("alg2")));

function frame(): void {
  const sctx = scene.getContext("2d");
  const tctx = strip.getContext("2d");
  if (sctx) {
    drawScene(sctx, vm, scene.width, scene.height);
  }
  if (tctx) {
    drawDistanceStrip(tctx, vm, strip.width, strip.height);
  }
  panel.textContent = describeState(vm).join("\n");
  if (vm.status !== "connected") {
    banner.textContent = vm.status === "connecting" ? `connecting to ${url} ...` : "disconnected - retrying";
    banner.className = "banner warn";
  } else if (vm.errorBanner) {
    banner.textContent = vm.errorBanner;
    banner.className = "banner error";
  } else {
    banner.textContent = vm.readOnly ? "viewing (read-only)" : "steer with arrows / WASD or drag";
    banner.className = "banner";
  }
  requestAnimationFrame(frame);
}

connect();
requestAnimationFrame(frame);
