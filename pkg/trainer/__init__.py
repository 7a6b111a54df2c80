"""Training: optimizer, step, epoch loop and checkpoints."""
from trainer.checkpoint import load_checkpoint, save_checkpoint
from trainer.loop import train_loop, train_step, warm_queues
from trainer.optim import OptimizerState, cosine_lr, sgd_update
from trainer.state import TrainState, init_train_state, steps_per_epoch

__all__ = [
    "OptimizerState",
    "TrainState",
    "cosine_lr",
    "init_train_state",
    "load_checkpoint",
    "save_checkpoint",
    "sgd_update",
    "steps_per_epoch",
    "train_loop",
    "train_step",
    "warm_queues",
]
