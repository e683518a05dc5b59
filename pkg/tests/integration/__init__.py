"""Integration tests for hutxosim: oracle equivalence, determinism and scaling."""
