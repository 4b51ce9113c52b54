"""colvm: a tiered execution engine for a small dynamic language with
adaptive columnar array storage and loop duplication."""

__all__ = ["Engine", "EngineConfig", "ExecMetrics", "run_program", "Thresholds"]


def __getattr__(name):
    if name in ("Engine", "EngineConfig", "ExecMetrics", "run_program"):
        from . import engine

        return getattr(engine, name)
    if name == "Thresholds":
        from .profiler import Thresholds

        return Thresholds
    raise AttributeError(name)
