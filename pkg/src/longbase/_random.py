import numpy as np


def substream(seed: int, *keys: int) -> np.random.Generator:
    """Independent generator for a (seed, key...) counter, schedule independent."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys))))
