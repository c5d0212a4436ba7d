import os

ENV_VAR = "DENSITREE_THREADS"


def resolve_threads(threads=None) -> int:
    """Worker count: explicit argument, then $DENSITREE_THREADS, then 1."""
    if threads is None:
        env = os.environ.get(ENV_VAR, "").strip()
        threads = int(env) if env else 1
    return max(1, int(threads))
