"""
Entry point for running hutxosim as a module.

Usage:
    python -m src [COMMAND] [OPTIONS]
"""

from .main import cli_main

if __name__ == "__main__":
    cli_main()
