// Wire types for the live bridge. Every frame carries the session tick.

export interface RobotPose {
  x: number;
  y: number;
  heading: number; // rad
}

export interface Pedestrian {
  x: number;
  y: number;
  radius: number;
}

export interface ArmAngles {
  servo1: number;
  servo2: number;
}

export interface StateRecord {
  step: number;
  t_ms: number;
  robot: RobotPose;
  pedestrians: Pedestrian[];
  readings: (number | null)[]; // ordered by sensor id; null = no echo
  arm: ArmAngles & { reacting: boolean };
  command: { arm: ArmAngles | null; base: string | null };
  dist_cm: number;
}

export interface Metrics {
  min_distance_cm: number | null;
  unsafe_dwell_ms: number;
  missed_detections: number;
  violations: number;
}

export interface BenchConfig {
  safe_distance_cm: number;
  body_diameter_cm: number;
  mount_radius_cm: number;
  beam_half_angle_deg: number;
  max_range_cm: number;
  sensor_count: number;
  base_speed_cm_per_ms: number;
}

export type ServerMsg =
  | {
      type: "hello";
      version: number;
      tick: number;
      tick_ms: number;
      policy: string;
      max_steer_cm_s: number;
      read_only: boolean;
      config: BenchConfig;
      world: StateRecord;
    }
  | {
      type: "state";
      tick: number;
      paused: boolean;
      policy: string;
      record: StateRecord;
      metrics: Metrics;
    }
  | { type: "error"; tick: number; message: string };

export type ClientMsg =
  | { type: "steer"; tick: number; vx: number; vy: number }
  | { type: "pause"; tick: number }
  | { type: "resume"; tick: number }
  | { type: "reset"; tick: number }
  | { type: "set_policy"; tick: number; name: string };
