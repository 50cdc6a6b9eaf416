"""Seeded, per-trial random streams.

All sampling in the package draws from numpy's Philox4x64 counter-based bit
generator keyed by the run seed. Trial ``t`` owns the counter blocks
``[t * blocks, (t + 1) * blocks)``, where one block yields four 64-bit words
and therefore four uniforms. A trial's stream depends only on
``(seed, t, blocks)``, so results do not depend on how trials are chunked or
distributed across workers.

Uniforms are produced with numpy's standard conversion
``(word >> 11) * 2**-53``, so :func:`trial_rng` (a scalar ``Generator`` on the
same stream) and :func:`trial_uniforms` (a vectorized block of many trials)
return identical numbers.
"""

from __future__ import annotations

import numpy as np

WORDS_PER_BLOCK = 4


def _check_seed(seed: int) -> None:
    if not 0 <= seed < 1 << 64:
        raise ValueError("seed must be an unsigned 64-bit integer")


def blocks_for(draws: int) -> int:
    """Number of Philox blocks needed to give each trial ``draws`` uniforms."""
    return max(1, -(-draws // WORDS_PER_BLOCK))


def trial_rng(seed: int, trial: int, draws: int = WORDS_PER_BLOCK) -> np.random.Generator:
    """Generator positioned at the start of trial ``trial``'s stream."""
    if trial < 0:
        raise ValueError("trial index must be non-negative")
    _check_seed(seed)
    bitgen = np.random.Philox(key=seed).advance(trial * blocks_for(draws))
    return np.random.Generator(bitgen)


def trial_uniforms(seed: int, start: int, stop: int, draws: int) -> np.ndarray:
    """Uniforms in [0, 1) for trials ``start..stop-1``, shape ``(stop - start, draws)``.

    Row ``i`` equals ``trial_rng(seed, start + i, draws).random(draws)``.
    """
    if not 0 <= start <= stop:
        raise ValueError("need 0 <= start <= stop")
    _check_seed(seed)
    blocks = blocks_for(draws)
    n = stop - start
    bitgen = np.random.Philox(key=seed).advance(start * blocks)
    raw = bitgen.random_raw(n * blocks * WORDS_PER_BLOCK).reshape(n, blocks * WORDS_PER_BLOCK)
    return (raw[:, :draws] >> np.uint64(11)) * (1.0 / 9007199254740992.0)


def free_rng(seed: int, trial: int) -> np.random.Generator:
    """Generator for trials with an unbounded or variable number of draws.

    Uses a separate Philox key (``seed + 2**64``) and gives each trial a
    region of ``2**64`` counter blocks, so streams never overlap each other or
    the fixed-width streams above.
    """
    _check_seed(seed)
    if trial < 0:
        raise ValueError("trial index must be non-negative")
    return np.random.Generator(np.random.Philox(key=seed + (1 << 64)).advance(trial << 64))
