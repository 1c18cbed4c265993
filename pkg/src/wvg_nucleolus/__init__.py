"""Exact nucleolus solver for weighted voting games.

The solver runs a ladder of n exact linear programs by constraint generation
against pseudo-polynomial dynamic-programming separation oracles, tracking
the span of fixed coalitions over small prime fields.  A brute-force module
recomputes everything by full enumeration on small instances for validation.
"""

from .bruteforce import ExplicitGame, brute_gamma, brute_nucleolus, brute_separate
from .game import (
    Allocation,
    Coalition,
    GameInputError,
    Instance,
    SizeLimitError,
    excess,
    excess_vector,
    lex_compare,
    value,
)
from .lp import ConstraintRecord, LPError, LPResult, LPRow, exact_lp_solve
from .modlinalg import (
    BasisFamily,
    ModVector,
    independent_over_some_prime,
    mod_reduce,
    orth_basis,
    rank_mod_p,
    rational_rank,
)
from .primes import PrimeSet, is_prime, prime_set
from .scheme import (
    LevelState,
    NucleolusResult,
    SchemeError,
    is_fixed,
    solve_nucleolus,
)
from .separation import (
    DPTable,
    SeparationVerdict,
    backtrace_witness,
    dp_min_table,
    dp_min_table_mod,
    full_separate,
    separate_level1,
    separate_level_j,
)

__version__ = "0.1.0"
