"""hutxosim - hUTXO ledger simulator with hURF contracts and parallel validation."""

__version__ = "0.1.0"
