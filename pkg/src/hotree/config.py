"""Tunable pipeline constants, grouped so callers can override per run."""

from __future__ import annotations

from dataclasses import dataclass

from .build.meta import DEFAULT_TAU


@dataclass(frozen=True)
class PipelineConfig:
    # field tagging
    numeric_threshold: float = 0.9
    categorical_distinct_ratio: float = 0.5
    categorical_distinct_cap: int = 10
    # verification
    verify_backward: bool = True
    backward_rel_tol: float = 1e-6
    # agent behavior
    resolve_context_turns: int = 5
    localize_margin: float = 0.05


@dataclass(frozen=True)
class BuildParams:
    tau: float = DEFAULT_TAU
    mode: str = "auto"

    def __post_init__(self) -> None:
        if not (0.0 <= self.tau <= 1.0):
            raise ValueError("tau must lie in [0, 1]")


DEFAULT_PIPELINE = PipelineConfig()
DEFAULT_BUILD = BuildParams()
