"""Installed entry point for the ``hutxosim`` command."""

from main import __version__, app, cli_main

__all__ = ["__version__", "app", "cli_main"]
