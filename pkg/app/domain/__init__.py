from .runner import COMMANDS, ExperimentRunner, load_experiment, resolve_operator

__all__ = ["COMMANDS", "ExperimentRunner", "load_experiment", "resolve_operator"]
