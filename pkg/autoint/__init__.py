from autoint.core.graph import ComputeGraph, Node, NodeKind, EvalReport, Tape, evaluate, record_tape
from autoint.core.params import ParamStore
from autoint.core.gradnet import AutoIntPair, IntegralBounds, derive, definite_integral
from autoint.errors import (AutoIntError, InputArityError, ParameterError, BuildError, DerivativeError,
                            OracleError, NumericalAbort, ConfigError, MissingArtifactError)
from autoint.logging import log_after, log_before, ObjectLogger
from autoint.nets import MLPSpec, InputBlock, FeatureBlock, Encoding, Nonlinearity, init_params, \
    build_integral_network
from autoint.quadrature import adaptive_quadrature, integrate_grad_network
from autoint.train import TrainConfig, Trainer, backward, fit_grad_network


__all__ = [
    'ComputeGraph', 'Node', 'NodeKind', 'EvalReport', 'Tape', 'evaluate', 'record_tape',
    'ParamStore',
    'AutoIntPair', 'IntegralBounds', 'derive', 'definite_integral',
    'AutoIntError', 'InputArityError', 'ParameterError', 'BuildError', 'DerivativeError',
    'OracleError', 'NumericalAbort', 'ConfigError', 'MissingArtifactError',
    'log_after', 'log_before', 'ObjectLogger',
    'MLPSpec', 'InputBlock', 'FeatureBlock', 'Encoding', 'Nonlinearity', 'init_params',
    'build_integral_network',
    'adaptive_quadrature', 'integrate_grad_network',
    'TrainConfig', 'Trainer', 'backward', 'fit_grad_network',
]

__version__ = '0.1.0'
