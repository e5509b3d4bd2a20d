"""Deterministic desk-scale test bench for safe human-robot interaction studies.

Simulates a three-omni-wheel mobile platform carrying a 2-DoF reactive
arm and six cone-beam rangefinders, steps two reactive safe-interaction
policies against scripted or live-steered pedestrians, and records
per-step traces from which all metrics and plots derive.
"""

__version__ = "0.1.0"
