"""Configuration settings for the coembed training engine."""
import os
from pathlib import Path

# Base directory
BASE_DIR = Path(__file__).parent.parent

# Logging - override with environment variables
LOG_LEVEL = os.getenv("COEMBED_LOG_LEVEL", "INFO").upper()

# Default location for run artifacts when the CLI is given a relative path
OUTPUT_DIR = Path(os.getenv("COEMBED_OUTPUT_DIR", str(BASE_DIR / "runs")))

# File format versioning
FORMAT_VERSION = 1
SPEC_VERSION = "1.0"
DATASET_FORMAT = "coembed.dataset"
CHECKPOINT_FORMAT = "coembed.checkpoint"
REPORT_FORMAT = "coembed.report"
CONFIG_FORMAT = "coembed.config"

METRICS_HEADER = [
    "epoch", "lr_image", "lr_text",
    "j_ii", "j_tag", "j_cc", "j_ic", "j_ci", "total",
]

# Process exit codes used by the CLI
EXIT_CODES = {
    "ok": 0,
    "check_failed": 1,
    "config": 2,
    "io": 3,
    "version": 4,
}

DEFAULT_SEED = 0

# Numeric tolerances
NORM_EPS = 1e-12
UNIT_NORM_TOL = 1e-10
FINITE_DIFF_STEP = 1e-5
GRADCHECK_TOLERANCE = 1e-4

# Synthetic data generation
GEN_DEFAULTS = {
    "num_classes": 8,
    "samples_per_class": 250,
    "image_dim": 32,
    "caption_dim": 24,
    "num_tags": 20,
    "noise_std": 0.25,
    "tags_per_class": 4,
    "tag_flip_prob": 0.05,
    "instance_dim": 4,
    "instance_scale": 1.0,
    "caption_missing_prob": 0.0,
    "tags_missing_prob": 0.0,
    "test_fraction": 0.1,
    "seed": DEFAULT_SEED,
}

# Stochastic augmentation (stands in for crops / back-translation)
AUG_DEFAULTS = {
    "noise_std": 0.1,
    "dropout_prob": 0.1,
}

# Reference encoders
ENCODER_DEFAULTS = {
    "hidden_dims": [64],
    "out_dim": 64,
    "intra_dim": 16,
    "inter_dim": 64,
    "head_mode": "separate",  # separate / shared
    "head_hidden": None,  # None -> backbone output width
}

# Contrastive losses (published hyperparameters)
LOSS_DEFAULTS = {
    "tau": 0.07,
    "alpha": 0.2,
    "epsilon": 2.0,
    "lambda_ii": 1.0,
    "lambda_tag": 1.0,
    "lambda_cc": 1.0,
    "lambda_ic": 1e-4,
    "lambda_ci": 1e-4,
}

# Optimization
OPTIM_DEFAULTS = {
    "lr_image": 0.03,
    "lr_text": 0.03,
    "sgd_momentum": 0.9,
    "weight_decay": 1e-4,
    "batch_size": 64,
    "epochs": 50,
    "momentum": 0.999,  # EMA coefficient m of the key encoders
    "warm_queues": True,
}

QUEUE_DEFAULTS = {
    "capacity": 256,
}

PROBE_DEFAULTS = {
    "learning_rate": 0.5,
    "max_iters": 500,
    "tolerance": 1e-7,
    "l2": 1e-4,
}

EVAL_DEFAULTS = {
    "k_list": [1, 5, 10],
    "miou_k_list": [3, 5],
}

# Desk-scale settings used for the end-to-end ordering runs. The hinge terms
# sum over the whole queue, so their weight scales with the queue length;
# a short run also needs key encoders that track the query encoders faster.
ACCEPTANCE_OVERRIDES = {
    "loss": {"lambda_ic": 0.05, "lambda_ci": 0.05},
    "optim": {"momentum": 0.99},
}

MODALITIES = ["image", "caption"]
LOSS_TERMS = ["j_ii", "j_tag", "j_cc", "j_ic", "j_ci"]
