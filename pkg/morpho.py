#!/usr/bin/env python3
"""
Launcher script for the morpho command-line tool
"""

import sys

from src.cli import main

if __name__ == "__main__":
    sys.exit(main())
