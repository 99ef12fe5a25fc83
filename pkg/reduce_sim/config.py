"""Global configuration constants."""

# Accelerator
ARRAY_ROWS = 256
ARRAY_COLS = 256

# Resilience profiling
PROFILE_REPEATS = 5
PROFILE_MAX_EPOCHS = 30
DEFAULT_STATISTIC = "max"  # most conservative of min/mean/max
ACCURACY_CONSTRAINT = 0.91
ACCURACY_SPLIT = "test"  # split every reported accuracy is measured on
INTERPOLATION_RULE = "linear-ceil"
BUDGET_EPSILON = 1e-9  # slack before ceil() so float noise never adds an epoch

# Fleet
FLEET_SIZE = 100

# Training
LEARNING_RATE = 0.05
MOMENTUM = 0.9
BATCH_SIZE = 32
PRETRAIN_EPOCHS = 20

# Synthetic data
CLUSTER_CENTER_SCALE = 1.0
TEST_EVERY = 5  # every 5th interleaved sample goes to the test split (80/20)
