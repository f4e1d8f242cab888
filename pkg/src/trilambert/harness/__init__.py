from .metrics import ErrorMetrics, compare, divergence_time
from .runner import RunResult, run_scenario, write_csv, write_outputs, write_report
from .scenario import Scenario, demo_scenario, load_scenario, parse_scenario
