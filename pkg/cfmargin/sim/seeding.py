"""
Counter-based seeds: a run's randomness depends only on what identifies the run, never on
the order in which runs are scheduled.
"""
import hashlib
from typing import List

import numpy as np


def derive_seed(*parts) -> int:
    """64-bit seed from the string forms of ``parts``; floats are formatted to 9 significant digits."""
    text = '|'.join(f'{p:.9g}' if isinstance(p, float) else str(p) for p in parts)
    return int.from_bytes(hashlib.blake2b(text.encode(), digest_size=8).digest(), 'little')


def agent_streams(seed: int, n: int) -> List[np.random.Generator]:
    """One independent generator per agent, by position in the agent order."""
    return [np.random.default_rng(child) for child in np.random.SeedSequence(seed).spawn(n)]
