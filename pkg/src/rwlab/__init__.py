"""rwlab: a workbench for learning equational rewriting.

Three deterministic rewriting environments (integer arithmetic, polynomial
arithmetic and loop-theory equations) share one cursor-and-rules interface;
a tree-network policy with hand-rolled gradients learns them through
shortest-solution imitation, with classic actor-critic baselines alongside.
"""

from .envs import (
    Action,
    EnvSpec,
    EnvState,
    Problem,
    StepResult,
    legal_actions,
    make_env,
    replay,
    reset,
    step,
)
from .matching import active_backend, set_backend
from .terms import (
    ParseError,
    RewriteRule,
    Signature,
    Symbol,
    Term,
    match,
    parse_pattern,
    parse_term,
    print_term,
    rewrite_at,
    subterm_at,
)

__version__ = "0.1.0"
