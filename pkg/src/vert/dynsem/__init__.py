"""Cycle simulation, trace-level property checking, mutation and contamination."""
from vert.dynsem.compile import Program, compile_module  # noqa: F401
from vert.dynsem.contaminate import contaminate  # noqa: F401
from vert.dynsem.kernels import BACKEND  # noqa: F401
from vert.dynsem.mutate import OPERATORS, Mutant, mutate, parse_ops, with_spans  # noqa: F401
from vert.dynsem.props import Verdict, eval_property, eval_property_scalar  # noqa: F401
from vert.dynsem.simulate import (  # noqa: F401
    Stimulus,
    StimulusPlan,
    Trace,
    build_stimulus,
    elaborate,
    simulate,
)
