from .constructions import (
    ConcaveCardinality,
    HardnessInstance,
    TightnessInstance,
    gprime_value,
    hardness_value,
    tightness_values,
)
from .cuts import CutInstance, cut_value, layered_graph, path_graph, random_graph, read_dimacs, two_moons
from .gp import GpInstance, random_kernel, variance_reduction_beta, variance_reduction_value
from .sparsity import (
    RegressionInstance,
    best_interval,
    generate_regression,
    gl_value,
    regularizer_value,
)
