#!/usr/bin/env python3
"""Reproduce the qubit relation table from the built-in device fixtures.

Equivalent to ``qcompat table1``; kept as a runnable script so the demo
works straight from a checkout without installing the package.
"""

import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from qcompat.cli import main  # noqa: E402

if __name__ == "__main__":
    sys.exit(main(["table1"] + sys.argv[1:]))
