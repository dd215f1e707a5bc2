from .runtime import ExecutionSummary, execute_package, run_agent, validate_package

__all__ = ["ExecutionSummary", "execute_package", "run_agent", "validate_package"]
