"""Unit tests for hutxosim modules."""
