"""Tax counterfactuals and plug-in average partial effects."""
from .ape import (CELLS, CSV_COLUMNS, MODES, ApeResult, cell_masks, double_lasso_effects,
                  income_quintiles, plug_in_ape)
from .bootstrap import bootstrap_ape
from .states import (BASELINE_LAMBDA, BASELINE_TAU, COUNTERFACTUALS, REGRESSIVE_TAU,
                     CounterfactualStates, anchor_mean_gross, baseline_schedule,
                     permanent_states, regressivity_states, shift_states,
                     shift_states_via_beliefs, transitory_states)
from .tax import (TaxSchedule, gross_from_net, log_net_map, net_income,
                  revenue_neutral_lambda)

__all__ = [
    "CELLS", "CSV_COLUMNS", "MODES", "ApeResult", "cell_masks", "double_lasso_effects",
    "income_quintiles", "plug_in_ape", "bootstrap_ape", "BASELINE_LAMBDA", "BASELINE_TAU",
    "COUNTERFACTUALS", "REGRESSIVE_TAU", "CounterfactualStates", "anchor_mean_gross",
    "baseline_schedule", "permanent_states", "regressivity_states", "shift_states",
    "shift_states_via_beliefs", "transitory_states", "TaxSchedule", "gross_from_net",
    "log_net_map", "net_income", "revenue_neutral_lambda",
]
