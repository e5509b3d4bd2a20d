"""Live steering bridge: one stepped simulation session over websockets.

The session advances on a single logical timeline, one engine step per
tick.  Inbound messages are queued and applied at tick boundaries only;
the latest steer before a tick wins and steers the pedestrian for that
tick.  Outbound broadcasting never blocks the tick: every client has a
latest-state mailbox and a slow reader simply skips intermediate states.

All frames are JSON text and carry the session tick number.

Server to client::

    {"type": "hello", "version": 1, "tick": n, "tick_ms": ms,
     "policy": "alg1", "max_steer_cm_s": 150.0, "read_only": bool,
     "config": {"safe_distance_cm", "body_diameter_cm", "mount_radius_cm",
                "beam_half_angle_deg", "max_range_cm", "sensor_count",
                "base_speed_cm_per_ms"},
     "world": <record>}
    {"type": "state", "tick": n, "paused": bool, "policy": name,
     "record": <record>, "metrics": {"min_distance_cm", "unsafe_dwell_ms",
     "missed_detections", "violations"}}
    {"type": "error", "tick": n, "message": str}

``<record>`` is the trace-record projection documented in trace_io
(step/t_ms/robot/pedestrians/readings/arm/command/dist_cm).

Client to server (all require "tick", an integer)::

    {"type": "steer", "tick": n, "vx": cm_s, "vy": cm_s}
    {"type": "pause", "tick": n}
    {"type": "resume", "tick": n}
    {"type": "reset", "tick": n}
    {"type": "set_policy", "tick": n, "name": "alg1" | "alg2"}

Steer magnitudes above the configured maximum are rejected with an
error reply and leave the previous steer in force.  The first client is
the driver; later clients are read-only viewers and their control
messages draw an error reply.  When the driver disconnects the session
pauses and the oldest remaining viewer (or the next client to connect)
inherits control and may resume.
"""

from __future__ import annotations

import asyncio
import json
import math
import threading
from collections import deque
from dataclasses import replace

from websockets.asyncio.server import serve
from websockets.exceptions import ConnectionClosed

from .engine import (
    MetricsAccumulator,
    PedestrianScript,
    Pose,
    SimConfig,
    TraceRecord,
    WorldState,
    initial_world,
    step,
)
from .policies import POLICY_NAMES, PolicyState, make_policy
from .sensors import Obstacle, sense_all
from .trace_io import metrics_to_dict, record_to_dict

PROTOCOL_VERSION = 1
DEFAULT_MAX_STEER_CM_S = 150.0
DEFAULT_SPAWN = Obstacle(200.0, 0.0, 15.0)


class Session:
    """Deterministic stepped world plus the live-input bookkeeping."""

    def __init__(
        self,
        cfg: SimConfig,
        policy_name: str,
        robot_start: Pose,
        pedestrian: Obstacle,
        max_steer_cm_s: float = DEFAULT_MAX_STEER_CM_S,
    ) -> None:
        self.cfg = cfg
        self.policy_name = policy_name
        self.max_steer_cm_s = max_steer_cm_s
        self._start = robot_start
        self._spawn = pedestrian
        self.reset()

    def reset(self) -> None:
        self.world: WorldState = initial_world(self._start, (self._spawn,))
        self.policy = make_policy(
            self.policy_name, self.cfg.safety, self.cfg.geometry, self.cfg.sensors
        )
        self.trace: list[TraceRecord] = []
        self.applied_positions: list[tuple[int, float, float]] = []
        self.steer: tuple[float, float] = (0.0, 0.0)
        self.rng = self.cfg.make_rng()
        self.metrics = MetricsAccumulator(self.cfg)

    @property
    def tick(self) -> int:
        return self.world.step_index

    def set_steer(self, vx: float, vy: float) -> None:
        if math.hypot(vx, vy) > self.max_steer_cm_s:
            raise ValueError(
                f"steer magnitude exceeds {self.max_steer_cm_s:g} cm/s"
            )
        self.steer = (float(vx), float(vy))

    def set_policy(self, name: str) -> None:
        if name not in POLICY_NAMES:
            raise ValueError(f"unknown policy {name!r}")
        self.policy_name = name
        self.policy = make_policy(
            name, self.cfg.safety, self.cfg.geometry, self.cfg.sensors
        )
        # A fresh ladder: the new policy starts from idle.
        self.world = replace(self.world, policy_state=PolicyState())

    def advance(self) -> TraceRecord:
        """Run one engine step with the current steer as the pedestrian motion."""
        ped = self.world.pedestrians[0]
        dt_s = self.cfg.dt_ms / 1000.0
        pos = (ped.x + self.steer[0] * dt_s, ped.y + self.steer[1] * dt_s)
        self.world, record = step(self.world, [pos], self.policy, self.cfg, self.rng)
        self.trace.append(record)
        self.applied_positions.append((record.t_ms, pos[0], pos[1]))
        self.metrics.add(record)
        return record

    def recorded_script(self) -> PedestrianScript:
        """The session so far as an offline-replayable waypoint script."""
        return PedestrianScript(
            ((0.0, self._spawn.x, self._spawn.y),)
            + tuple((float(t), x, y) for t, x, y in self.applied_positions)
        )

    def snapshot_record(self) -> dict:
        """Record-shaped projection of the current world (no command)."""
        readings = sense_all(
            (self.world.robot.x, self.world.robot.y, self.world.robot.heading),
            self.world.pedestrians,
            self.cfg.sensors,
        )
        ped = self.world.pedestrians
        robot = self.world.robot
        dist = min(math.hypot(p.x - robot.x, p.y - robot.y) for p in ped)
        return {
            "step": self.world.step_index,
            "t_ms": self.world.t_ms,
            "robot": {"x": robot.x, "y": robot.y, "heading": robot.heading},
            "pedestrians": [{"x": p.x, "y": p.y, "radius": p.radius} for p in ped],
            "readings": [r.range_cm for r in readings],
            "arm": {
                "servo1": self.world.arm_state.servo1,
                "servo2": self.world.arm_state.servo2,
                "reacting": self.world.arm_state.reacting,
            },
            "command": {"arm": None, "base": None},
            "dist_cm": dist,
        }


class BridgeServer:
    """Runs a Session on its own event-loop thread and serves clients."""

    def __init__(
        self,
        session: Session,
        host: str = "127.0.0.1",
        port: int = 8765,
        tick_ms: int | None = None,
    ) -> None:
        self.session = session
        self.host = host
        self.port = port
        self.tick_ms = tick_ms if tick_ms is not None else session.cfg.dt_ms
        if self.tick_ms != session.cfg.dt_ms:
            # The tick IS the engine dt; keep them in lockstep.
            session.cfg = replace(session.cfg, dt_ms=self.tick_ms)
            session.reset()
        self._thread: threading.Thread | None = None
        self._loop: asyncio.AbstractEventLoop | None = None
        self._ready = threading.Event()
        self._startup_error: BaseException | None = None
        self._stop: asyncio.Event | None = None
        self._clients: dict = {}  # connection -> mailbox dict
        self._order: list = []  # connection order, first is the driver
        self._pending: list[tuple[object, dict]] = []
        self.user_paused = False

    @classmethod
    def from_scenario(
        cls,
        scenario=None,
        host: str = "127.0.0.1",
        port: int = 8765,
        tick_ms: int | None = None,
        policy: str | None = None,
        max_steer_cm_s: float = DEFAULT_MAX_STEER_CM_S,
    ) -> "BridgeServer":
        if scenario is None:
            cfg = SimConfig()
            session = Session(
                cfg, policy or "alg1", Pose(0.0, 0.0, 0.0), DEFAULT_SPAWN, max_steer_cm_s
            )
        else:
            spawn = Obstacle(*scenario.scripts[0].position_at(0), scenario.radii[0])
            session = Session(
                scenario.config,
                policy or scenario.policy,
                scenario.robot_start,
                spawn,
                max_steer_cm_s,
            )
        return cls(session, host=host, port=port, tick_ms=tick_ms)

    # -- lifecycle -----------------------------------------------------

    def start(self) -> None:
        """Bind and start serving on a background thread; raises on bind failure."""
        self._thread = threading.Thread(target=self._run_thread, daemon=True)
        self._thread.start()
        self._ready.wait()
        if self._startup_error is not None:
            self._thread.join()
            raise self._startup_error

    def wait(self) -> None:
        if self._thread is not None:
            self._thread.join()

    def stop(self) -> None:
        loop = self._loop
        if loop is not None and self._stop is not None and not loop.is_closed():
            try:
                loop.call_soon_threadsafe(self._stop.set)
            except RuntimeError:
                pass
        if self._thread is not None:
            self._thread.join(timeout=5)

    def _run_thread(self) -> None:
        try:
            asyncio.run(self._serve())
        except BaseException as exc:
            if not self._ready.is_set():
                self._startup_error = exc
                self._ready.set()

    async def _serve(self) -> None:
        self._loop = asyncio.get_running_loop()
        self._stop = asyncio.Event()
        try:
            server = await serve(self._handler, self.host, self.port)
        except OSError as exc:
            self._startup_error = exc
            self._ready.set()
            return
        self.port = server.sockets[0].getsockname()[1]
        self._ready.set()
        ticker = asyncio.create_task(self._tick_loop())
        try:
            await self._stop.wait()
        finally:
            ticker.cancel()
            server.close()
            await server.wait_closed()

    # -- broadcasting ---------------------------------------------------

    def _state_payload(self) -> str:
        session = self.session
        if session.trace:
            record = record_to_dict(session.trace[-1])
        else:
            record = session.snapshot_record()
        return json.dumps(
            {
                "type": "state",
                "tick": session.tick,
                "paused": not self._running(),
                "policy": session.policy_name,
                "record": record,
                "metrics": metrics_to_dict(session.metrics.snapshot()),
            },
            separators=(",", ":"),
        )

    def _broadcast_state(self) -> None:
        payload = self._state_payload()
        for box in self._clients.values():
            box["latest"] = payload
            box["event"].set()

    def _send_direct(self, connection, payload: str) -> None:
        box = self._clients.get(connection)
        if box is not None:
            box["direct"].append(payload)
            box["event"].set()

    async def _client_sender(self, connection, box) -> None:
        # Sole sender for this connection: direct frames first (hello,
        # errors), then whatever state is freshest.  A slow reader only
        # ever delays itself and sees the latest state when it catches up.
        try:
            while True:
                await box["event"].wait()
                box["event"].clear()
                while box["direct"]:
                    await connection.send(box["direct"].popleft())
                payload = box["latest"]
                if payload is not None:
                    box["latest"] = None
                    await connection.send(payload)
        except (ConnectionClosed, asyncio.CancelledError):
            pass

    # -- tick loop -------------------------------------------------------

    def _running(self) -> bool:
        return bool(self._order) and not self.user_paused

    def _apply_pending(self) -> None:
        for connection, msg in self._pending:
            self._apply_command(connection, msg)
        self._pending.clear()

    def _apply_command(self, connection, msg) -> None:
        session = self.session
        kind = msg["type"]
        try:
            if kind == "steer":
                session.set_steer(float(msg["vx"]), float(msg["vy"]))
            elif kind == "pause":
                self.user_paused = True
                self._broadcast_state()
            elif kind == "resume":
                self.user_paused = False
                self._broadcast_state()
            elif kind == "reset":
                session.reset()
                self._broadcast_state()
            elif kind == "set_policy":
                session.set_policy(str(msg["name"]))
                self._broadcast_state()
        except (KeyError, TypeError, ValueError) as exc:
            self._error_to(connection, f"rejected {kind}: {exc}")

    async def _tick_loop(self) -> None:
        period = self.tick_ms / 1000.0
        loop = asyncio.get_running_loop()
        next_due = loop.time() + period
        while True:
            await asyncio.sleep(max(0.0, next_due - loop.time()))
            next_due = max(next_due + period, loop.time())
            self._apply_pending()
            if self._running():
                self.session.advance()
                self._broadcast_state()

    # -- per-client handling ----------------------------------------------

    def _error_to(self, connection, message: str) -> None:
        payload = json.dumps(
            {"type": "error", "tick": self.session.tick, "message": message},
            separators=(",", ":"),
        )
        self._send_direct(connection, payload)

    def _hello_payload(self, read_only: bool) -> str:
        session = self.session
        cfg = session.cfg
        return json.dumps(
            {
                "type": "hello",
                "version": PROTOCOL_VERSION,
                "tick": session.tick,
                "tick_ms": self.tick_ms,
                "policy": session.policy_name,
                "max_steer_cm_s": session.max_steer_cm_s,
                "read_only": read_only,
                "config": {
                    "safe_distance_cm": cfg.safety.safe_distance,
                    "body_diameter_cm": cfg.geometry.body_diameter,
                    "mount_radius_cm": cfg.sensors.mount_radius,
                    "beam_half_angle_deg": cfg.sensors.beam_half_angle,
                    "max_range_cm": cfg.sensors.max_range,
                    "sensor_count": cfg.sensors.count,
                    "base_speed_cm_per_ms": cfg.base_speed_cm_per_ms,
                },
                "world": session.snapshot_record(),
            },
            separators=(",", ":"),
        )

    async def _handler(self, connection) -> None:
        box = {"latest": None, "event": asyncio.Event(), "direct": deque()}
        sender = asyncio.create_task(self._client_sender(connection, box))
        self._clients[connection] = box
        self._order.append(connection)
        try:
            self._send_direct(connection, self._hello_payload(read_only=not self._is_driver(connection)))
            self._broadcast_state()
            async for raw in connection:
                self._on_message(connection, raw)
        except ConnectionClosed:
            pass
        finally:
            self._clients.pop(connection, None)
            if connection in self._order:
                was_driver = self._is_driver(connection)
                self._order.remove(connection)
                if was_driver:
                    # Driver lost: pause until someone resumes; the oldest
                    # remaining viewer inherits control.
                    self.user_paused = True
                    if self._order:
                        self._send_direct(self._order[0], self._hello_payload(read_only=False))
                    self._broadcast_state()
            await asyncio.sleep(0)  # let the sender flush anything queued
            sender.cancel()

    def _is_driver(self, connection) -> bool:
        return bool(self._order) and self._order[0] is connection

    def _on_message(self, connection, raw) -> None:
        try:
            msg = json.loads(raw)
        except (json.JSONDecodeError, UnicodeDecodeError):
            self._error_to(connection, "malformed message: not valid JSON")
            return
        if not isinstance(msg, dict) or not isinstance(msg.get("type"), str):
            self._error_to(connection, "malformed message: missing type")
            return
        if not isinstance(msg.get("tick"), int):
            self._error_to(connection, "malformed message: missing tick")
            return
        kind = msg["type"]
        if kind not in ("steer", "pause", "resume", "reset", "set_policy"):
            self._error_to(connection, f"unknown message type {kind!r}")
            return
        if not self._is_driver(connection):
            self._error_to(connection, "read-only client")
            return
        if kind == "steer":
            try:
                vx, vy = float(msg["vx"]), float(msg["vy"])
            except (KeyError, TypeError, ValueError):
                self._error_to(connection, "malformed steer: vx/vy required")
                return
            if not (math.isfinite(vx) and math.isfinite(vy)):
                self._error_to(connection, "malformed steer: vx/vy must be finite")
                return
            if math.hypot(vx, vy) > self.session.max_steer_cm_s:
                self._error_to(
                    connection,
                    f"steer magnitude exceeds {self.session.max_steer_cm_s:g} cm/s",
                )
                return
        # Queued; applied at the next tick boundary.
        self._pending.append((connection, msg))
