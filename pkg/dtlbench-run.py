#!/usr/bin/env python
"""
Entry point script for dtlbench
"""
import sys
from dtlbench.cli import main

if __name__ == "__main__":
    sys.exit(main())
