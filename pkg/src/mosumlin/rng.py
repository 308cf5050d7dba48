"""Per-replication random streams.

Replication ``r`` under master seed ``s`` always draws from the Philox
(counter-based) stream keyed by ``(s, r)``, so results never depend on the
order or the thread in which replications run.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


def stream(seed: int, replication: int = 0, *, purpose: int = 0) -> np.random.Generator:
    """Independent generator for ``(seed, replication)``.

    ``purpose`` separates unrelated consumers sharing one seed (e.g. the signal
    coefficients and the noise of the same replication).
    """
    ss = np.random.SeedSequence(entropy=int(seed) & _MASK64, spawn_key=(int(replication), int(purpose)))
    return np.random.Generator(np.random.Philox(ss))
