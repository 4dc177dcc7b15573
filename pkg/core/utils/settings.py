import os
from fractions import Fraction

from dotenv import load_dotenv

load_dotenv()


def get_bool_env(key, default=False):
    return os.getenv(key, str(default)).lower() in ("true", "1", "yes")


# Logging
log_level = os.getenv("MAZE_POLICY_LOG_LEVEL", "INFO").upper()

# Oracle box
padding = int(os.getenv("MAZE_POLICY_PADDING", 1))

# Episode step budget: factor x (box Manhattan diameter + 1)
max_steps_factor = int(os.getenv("MAZE_POLICY_MAX_STEPS_FACTOR", 10))

# Noisy value iteration
noisy_tolerance = Fraction(os.getenv("MAZE_POLICY_NOISY_TOLERANCE", "1/1000000000"))
noisy_max_iterations = int(os.getenv("MAZE_POLICY_NOISY_MAX_ITERATIONS", 1000000))

# Monte-Carlo noise check
mc_episodes = int(os.getenv("MAZE_POLICY_MC_EPISODES", 10000))

# Tree compilation
dag_dir_tree = get_bool_env("MAZE_POLICY_DAG_DIR_TREE", False)
