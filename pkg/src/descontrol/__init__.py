"""Supervisory control synthesis for discrete-event systems.

Finite automata, supremal controllable supervisors, statechart flattening,
closed-loop simulation and an elevator case study.
"""

from descontrol.errors import (
    AlphabetError,
    CapExceeded,
    ConflictError,
    ControllabilityBreach,
    DomainError,
    ModelError,
    ParseError,
    SynthesisError,
)
from descontrol.fsa import (
    Alphabet,
    Automaton,
    Event,
    RunResult,
    accepts,
    accessible,
    coaccessible,
    dump_fsa,
    enumerate_language,
    is_isomorphic,
    meet,
    parse_fsa,
    sync,
    trim,
)
from descontrol.synthesis import (
    ControllabilityReport,
    Supervisor,
    check_controllable,
    disablement_map,
    lift,
    nonblocking,
    nonconflicting,
    supcon,
)

__version__ = "0.1.0"

__all__ = [
    "AlphabetError",
    "CapExceeded",
    "ConflictError",
    "ControllabilityBreach",
    "DomainError",
    "ModelError",
    "ParseError",
    "SynthesisError",
    "Alphabet",
    "Automaton",
    "Event",
    "RunResult",
    "accepts",
    "accessible",
    "coaccessible",
    "dump_fsa",
    "enumerate_language",
    "is_isomorphic",
    "meet",
    "parse_fsa",
    "sync",
    "trim",
    "ControllabilityReport",
    "Supervisor",
    "check_controllable",
    "disablement_map",
    "lift",
    "nonblocking",
    "nonconflicting",
    "supcon",
]
