"""Constrained-optimization training for physics-informed neural networks.

Penalty, Lagrange-multiplier, and augmented-Lagrangian relaxations (plus
soft-attention and learning-rate-annealing baselines) on four benchmark
PDEs with analytic solutions, built on an in-package reverse-mode tape
and forward-mode jets.
"""

from .balancers import BalancerState, assemble, ascend_lambda, make_state
from .kernels import BACKEND
from .network import Architecture, Params, forward, forward_values, init
from .optim import TrainOptions, evaluate, train
from .problems import GridSpec, PdeProblem, by_name

__version__ = "0.1.0"

__all__ = [
    "Architecture",
    "BalancerState",
    "GridSpec",
    "Params",
    "PdeProblem",
    "TrainOptions",
    "BACKEND",
    "assemble",
    "ascend_lambda",
    "by_name",
    "evaluate",
    "forward",
    "forward_values",
    "init",
    "make_state",
    "train",
    "__version__",
]
