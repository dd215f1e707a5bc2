from .registry import ModelRecord, ModelRegistry, ModelpodError
from .jobs import Job, JobManager

__all__ = ["ModelRecord", "ModelRegistry", "ModelpodError", "Job", "JobManager"]
