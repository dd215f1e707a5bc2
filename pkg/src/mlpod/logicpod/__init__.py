from .config import LogicpodConfig
from .engine import LogicpodError, PipelineStore, RunEngine, replay_events

__all__ = ["LogicpodConfig", "LogicpodError", "PipelineStore", "RunEngine", "replay_events"]
