"""Heterarchical supervisor localization for discrete-event systems under partial observation."""

from .automata import (
    AutomatonError,
    EventAttributes,
    EventTable,
    Generator,
    ObservationMask,
    determinize,
    is_nonblocking,
    language_equal,
    minimize,
    project_generator,
    project_string,
    selfloop,
    sync,
    trim,
)
from .heterarchical import PipelineManifest, run_pipeline, verify_global_equivalence
from .kernels import BACKEND
from .localization import localize, merge_local_controllers, verify_control_equivalence
from .synthesis import (
    POSupervisor,
    SynthesisProblem,
    build_po_supervisor,
    check_relative_observability,
    is_controllable,
    sup_cn,
    sup_rco,
    supcon,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "AutomatonError",
    "EventAttributes",
    "EventTable",
    "Generator",
    "ObservationMask",
    "POSupervisor",
    "PipelineManifest",
    "SynthesisProblem",
    "build_po_supervisor",
    "check_relative_observability",
    "determinize",
    "is_controllable",
    "is_nonblocking",
    "language_equal",
    "localize",
    "merge_local_controllers",
    "minimize",
    "project_generator",
    "project_string",
    "run_pipeline",
    "selfloop",
    "sup_cn",
    "sup_rco",
    "supcon",
    "sync",
    "trim",
    "verify_control_equivalence",
    "verify_global_equivalence",
]
