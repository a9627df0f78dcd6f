#!/usr/bin/env python3
"""Print the bound-comparison tables (same as `emstencil tables`)."""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from emstencil.bench import report_tables

if __name__ == "__main__":
    print(report_tables())
