"""Deterministic asynchronous network simulator."""

from .byzantine import BEHAVIOURS, Behaviour, byzantine_step
from .node import FACTORY, Node
from .runner import (
    ADVERSARIES, CSV_COLUMNS, INPUT_MODES, PROTOCOLS, LivenessViolation, Metrics,
    RunResult, ScenarioConfig, run,
)
from .scheduler import STRATEGIES, PendingMessage, Scheduler, fairness_bound, scheduler_next

__all__ = [
    "ADVERSARIES", "BEHAVIOURS", "CSV_COLUMNS", "FACTORY", "INPUT_MODES", "PROTOCOLS",
    "STRATEGIES", "Behaviour", "LivenessViolation", "Metrics", "Node", "PendingMessage",
    "RunResult", "ScenarioConfig", "Scheduler", "byzantine_step", "fairness_bound", "run",
    "scheduler_next",
]
