"""MLPod sandbox: cooperating auth/data/model/logic services plus an edge agent."""

__version__ = "0.1.0"
