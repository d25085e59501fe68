#!/usr/bin/env python3
"""
Command-line entry point for the LEO orbit planner

    python main.py ingest --catalog tests/fixtures/small_catalog.tle --out catalog.tle
    python main.py train --algorithm a2c --seed 0 --out runs/a2c-0
"""

import sys

from orbit_planner.main import main

if __name__ == "__main__":
    sys.exit(main())
