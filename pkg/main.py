# ---------------------------------------------
# LAUNCHER
# ---------------------------------------------
"""Run the lab from a source checkout: ``python main.py <command> ...``."""
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from src.main import main  # noqa: E402

if __name__ == "__main__":
    raise SystemExit(main(sys.argv[1:]))
