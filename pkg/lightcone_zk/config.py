"""
config.py — Laboratory constants, brute-force guards and run settings.

Handles:
  • Numerical tolerances shared by every theorem check
  • Brute-force guards for exhaustive searches
  • Spacetime defaults (unit speed of light, V1–V2 separation)
  • Seed resolution from the environment and per-trial seed spawning
  • Central RunSettings dataclass for all CLI-configurable options
"""

import logging
import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

logger = logging.getLogger(__name__)

# ─── Numerical Tolerances ────────────────────────────────────
INEQUALITY_TOL   = 1e-9
PSD_TOL          = 1e-10
STATE_TOL        = 1e-10
PROJECTOR_TOL    = 1e-9
DEGENERATE_NORM  = 1e-12

# ─── Brute-Force Guards ──────────────────────────────────────
MAX_CYCLE_ENUMERATION_N  = 9
MAX_HAMILTONIAN_SEARCH_N = 12
MAX_SOUNDNESS_SCAN_N     = 7
MAX_STRATEGY_EVALUATIONS = 10 ** 7
MAX_QUANTUM_DIMENSION    = 64
MAX_ZK_ENUMERATION_N     = 3
MAX_ZK_ENUMERATION_Q     = 3
TRIAL_DIVISION_LIMIT     = 1000

# ─── Spacetime Defaults ──────────────────────────────────────
SPEED_OF_LIGHT            = 1.0
DEFAULT_SEPARATION        = 1.0
DEFAULT_PROCESSING_DELAY  = 0.0

# ─── Batch Defaults ──────────────────────────────────────────
DEFAULT_WORKERS     = 4
DEFAULT_CONFIDENCE  = 0.99
SEED_ENV_VAR        = "LCZK_SEED"
SEED_MASK           = (1 << 64) - 1


def default_seed() -> int:
    """Seed from the environment, 0 when unset or unparsable."""
    raw = os.environ.get(SEED_ENV_VAR, "").strip()
    if not raw:
        return 0
    try:
        return int(raw, 0) & SEED_MASK
    except ValueError:
        logger.warning("Ignoring invalid %s=%r, using seed 0", SEED_ENV_VAR, raw)
        return 0


def spawn_seeds(seed: int, count: int) -> List[int]:
    """
    Derive `count` independent 64-bit seeds from one master seed.
    Trial i always receives the same seed regardless of worker scheduling.
    """
    children = np.random.SeedSequence(seed & SEED_MASK).spawn(count)
    return [int(c.generate_state(1, dtype=np.uint64)[0]) for c in children]


# ─── Run Settings ────────────────────────────────────────────

@dataclass
class RunSettings:
    """Everything a CLI subcommand needs besides its own flags."""
    subcommand: str = ""
    seed: int = field(default_factory=default_seed)
    output_path: Optional[str] = None
    output_format: str = "json"          # json or pretty
    workers: int = DEFAULT_WORKERS
    separation: float = DEFAULT_SEPARATION
    processing_delay: float = DEFAULT_PROCESSING_DELAY
    options: Dict[str, object] = field(default_factory=dict)

    @property
    def seed64(self) -> int:
        return self.seed & SEED_MASK

    @property
    def pretty(self) -> bool:
        return self.output_format == "pretty"
