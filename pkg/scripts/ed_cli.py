#!/usr/bin/env python3
"""
Launcher for the Entangle Detect CLI without installing the package

Usage:
  python scripts/ed_cli.py check --state bell.json --criterion vicente
"""
from __future__ import annotations

import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), ".."))

from app.cli import main  # noqa: E402

if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
