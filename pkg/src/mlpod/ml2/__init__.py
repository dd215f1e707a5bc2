from .lang import (
    ExecutionPlan,
    Ml2CompileError,
    Ml2Document,
    Ml2Error,
    Ml2Input,
    Ml2Model,
    Ml2ParseError,
    Ml2SchemaError,
    Ml2Step,
    RenderSection,
    RenderSpec,
    compile_plan,
    parse_ml2,
    serialize_ml2,
    validate,
)

__all__ = [
    "ExecutionPlan",
    "Ml2CompileError",
    "Ml2Document",
    "Ml2Error",
    "Ml2Input",
    "Ml2Model",
    "Ml2ParseError",
    "Ml2SchemaError",
    "Ml2Step",
    "RenderSection",
    "RenderSpec",
    "compile_plan",
    "parse_ml2",
    "serialize_ml2",
    "validate",
]
