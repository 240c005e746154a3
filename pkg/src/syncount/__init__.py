"""Toolkit for self-stabilising Byzantine-tolerant synchronous 2-counting:
exact verification, SAT-based synthesis (direct and counterexample-guided),
constructive transforms and Monte Carlo simulation."""

from .model import (
    Algorithm,
    Execution,
    Params,
    CYCLIC,
    GENERAL,
    load_algorithm,
    load_bundled,
    parse_algorithm,
    save_algorithm,
    write_algorithm,
)
from .verify import (
    ProjectionGraph,
    VerificationReport,
    build_projection_graph,
    check_stabilization,
    export_dot,
    extract_counterexample,
    is_reachable,
)

__version__ = "0.1.0"

__all__ = [
    "Algorithm",
    "Execution",
    "Params",
    "CYCLIC",
    "GENERAL",
    "ProjectionGraph",
    "VerificationReport",
    "build_projection_graph",
    "check_stabilization",
    "export_dot",
    "extract_counterexample",
    "is_reachable",
    "load_algorithm",
    "load_bundled",
    "parse_algorithm",
    "save_algorithm",
    "write_algorithm",
    "__version__",
]
