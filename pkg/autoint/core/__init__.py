from autoint.core.graph import ComputeGraph, Node, NodeKind, EvalReport, Tape
from autoint.core.params import ParamStore
from autoint.core.gradnet import AutoIntPair, IntegralBounds, derive

__all__ = [
    'ComputeGraph',
    'Node',
    'NodeKind',
    'EvalReport',
    'Tape',
    'ParamStore',
    'AutoIntPair',
    'IntegralBounds',
    'derive',
]
