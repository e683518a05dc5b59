"""
Entry point for running hutxosim as a module.

Usage:
    python -m hutxosim [COMMAND] [OPTIONS]
"""

from main import cli_main

if __name__ == "__main__":
    cli_main()
