#!/usr/bin/env python3
"""
╔══════════════════════════════════════════════════════════════╗
║               Lightcone ZK Lab  — Entry Point                ║
║     Relativistic Two-Prover Zero Knowledge, Checked at Desk  ║
╚══════════════════════════════════════════════════════════════╝

Usage:
    python main.py params --n 3 --k 1
    python main.py run --graph graphs/k3.txt --q 7 --trials 100
    python main.py attack --graph graphs/path3.txt --q 3 --strategy optimal --trials 10000
    python main.py zk-compare --n 3 --q 2
    python main.py verify-quantum --dim 8 --n 4 --s 2 --trials 1000
    python main.py --help
"""

import importlib.util
import logging
import sys

# ─── Logging Setup ───────────────────────────────────────────
logging.basicConfig(
    level=logging.INFO,
    format="%(asctime)s  %(levelname)-8s  %(name)s — %(message)s",
    datefmt="%H:%M:%S",
    stream=sys.stderr,
)
logger = logging.getLogger("lightcone_zk")


# ─── Dependency Check ────────────────────────────────────────
REQUIRED = (
    ("numpy", "numpy"),
    ("scipy", "scipy"),
    ("sympy", "sympy"),
)


def check_dependencies() -> None:
    """Exit with an install hint if a numerical package is missing."""
    missing = [pip_name for module, pip_name in REQUIRED if importlib.util.find_spec(module) is None]
    if not missing:
        return
    banner = "=" * 55
    sys.stderr.write(
        f"\n{banner}\n  MISSING DEPENDENCIES\n{banner}\n"
        f"\n  Install with:  pip install {' '.join(missing)}\n\n"
    )
    sys.exit(1)


def main() -> None:
    check_dependencies()

    from lightcone_zk.cli import dispatch

    logger.debug("argv: %s", sys.argv[1:])
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
