"""Closed-loop reactive planning benchmark.

Simulates multi-agent traffic at 10 Hz around a pluggable ego planner, drives
surrounding agents with rule-based IDM, log replay, or a noise-decoupled
diffusion rollout with interaction-aware agent selection, and scores runs
with composite closed-loop, robustness, and realism metrics.
"""

__version__ = "0.1.0"
