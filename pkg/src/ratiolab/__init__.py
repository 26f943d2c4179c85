"""Word-metric balls, covering diagnostics and ratio-average experiments."""
from .groups import (
    BudgetExceeded,
    FiniteSubset,
    GroupContext,
    GroupError,
    ball,
    ball_sizes,
    central_powers_in_ball,
    free_group,
    from_kind,
    heisenberg,
    heisenberg_word_length,
    set_product,
    zd,
    zinf,
)

__version__ = "0.1.0"
