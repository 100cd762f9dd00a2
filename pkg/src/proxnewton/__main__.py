# ABOUTME: Module entry point so `python -m proxnewton` runs the experiment CLI.
# ABOUTME: Wraps cli.main.main() with a setup-error message that points users at docs/ENVIRONMENT_SETUP.md.
"""
Entry point for running proxnewton as a module.

Usage:
    python -m proxnewton --alpha 40 --mode both --out results/
"""

import sys


def main(argv=None):
    """Main entry point for proxnewton."""
    try:
        from .cli.main import main as run_cli
    except ImportError as e:
        print(f"Error starting proxnewton: {e}")
        print()
        print("Make sure you have installed all dependencies: uv sync")
        print()
        print("For setup help, see docs/ENVIRONMENT_SETUP.md")
        return 1
    return run_cli(argv)


if __name__ == "__main__":
    sys.exit(main())
