import numpy as np


def seed_sequence(seed: int, *key: int) -> np.random.SeedSequence:
    if seed < 0:
        raise ValueError(f"Seeds must be non-negative, got {seed}")
    return np.random.SeedSequence(entropy=seed, spawn_key=tuple(int(k) for k in key))


def substream(seed: int, *key: int) -> np.random.Generator:
    """
    Independent generator for the stream labelled by (seed, *key). Simulation i of a run
    uses substream(seed, i), so its draws do not depend on which worker runs it.
    """
    return np.random.Generator(np.random.Philox(seed_sequence(seed, *key)))


def derive_seed(seed: int, *key: int) -> int:
    """A plain integer seed for a nested run, e.g. the engine run inside a calibration replicate."""
    return int(seed_sequence(seed, *key).generate_state(1, dtype=np.uint32)[0])
