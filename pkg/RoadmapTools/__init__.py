VERSION = "0.1"

TIMESTAMP_FORMAT = "%Y-%m-%d %H:%M:%S"

# collision checking
DEFAULT_RESOLUTION = 0.01

# belief model
DEFAULT_K = 15
DEFAULT_LAMBDA = 0.5
DEFAULT_W_LAMBDA = 0.25
EPSILON_DIST = 1e-9

# search and densification
DEFAULT_D_ALPHA = 0.1
INITIAL_BATCH_VERTICES = 100
RADIUS_CONSTANT = 3.0
PRUNE_THRESHOLD = 0.01

THREADS_ENV_VAR = "ROADMAP_BENCH_THREADS"
