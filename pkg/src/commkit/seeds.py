"""Deterministic 64-bit seed derivation for ensembles and sweeps.

split64 is a splitmix64-style mix (fixed multiplier constants, xor-shifts).
The constants are part of the on-disk reproducibility contract: ensembles
regenerated from the same base seed produce the same member seeds on any
machine, in any execution order.
"""

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def split64(base: int, index: int) -> int:
    """Derive the `index`-th child seed of `base`."""
    z = (base + (index + 1) * _GAMMA) & _MASK
    z ^= z >> 30
    z = (z * _MIX1) & _MASK
    z ^= z >> 27
    z = (z * _MIX2) & _MASK
    z ^= z >> 31
    return z
