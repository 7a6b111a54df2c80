"""Command-line surface: data generation, training, evaluation, gradient checks."""
from cli.commands import cmd_eval, cmd_gen_data, cmd_gradcheck, cmd_train
from cli.gradcheck import GradcheckResult, run_gradcheck

__all__ = ["GradcheckResult", "cmd_eval", "cmd_gen_data", "cmd_gradcheck", "cmd_train", "run_gradcheck"]
