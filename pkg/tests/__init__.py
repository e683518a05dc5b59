"""hutxosim test suite."""
