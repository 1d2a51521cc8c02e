from .config import ScenarioConfig, load_scenario
from .runner import ResultTable, emit_csv, run_sweep

__all__ = ["ScenarioConfig", "load_scenario", "ResultTable", "run_sweep", "emit_csv"]
