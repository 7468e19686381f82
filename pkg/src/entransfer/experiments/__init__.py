"""Figure-reproducing experiment runners and their command-line front end."""

from .config import SweepConfig, default_config, load_config, parse_config, serialize_config
from .results import SweepResult
from .runners import (
    run_boundary,
    run_convergence,
    run_experiment,
    run_fig2,
    run_fig3,
    run_fig4,
    run_fig5,
    run_prepare,
    run_sweep,
)
