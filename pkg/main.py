#!/usr/bin/env python
"""
proxnewton - Convenience wrapper for running the experiment CLI

This is a convenience script that imports and runs the experiment driver
from the proxnewton package.

Usage:
    python main.py --alpha 40,80 --mode both --out results/

Or use the module directly:
    python -m proxnewton --alpha 40 --out results/
"""

import sys

# Run the experiment CLI from the package
if __name__ == "__main__":
    from src.proxnewton.__main__ import main
    sys.exit(main())
