import numpy as np


def make_rng(seed, *stream):
    """
    Philox generator for ``seed`` and an optional stream key.

    The same (seed, stream) always yields the same draws; different stream
    keys give independent generators, so sub-tasks never share state.
    """
    sequence = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in stream))
    return np.random.Generator(np.random.Philox(sequence))
