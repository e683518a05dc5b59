"""
Canonical JSON for ledgers and transaction sequences.

Keys are sorted and separators compact, so the byte length of a ledger's JSON
is the blockchain-space measurement and its BLAKE2b digest identifies the
final state across validators. Integers (including 512-bit hashes) are plain
JSON numbers. Sequence files look like::

    {"genesis": [Output, ...], "events": [{"tx": Tx} | {"tick": t}, ...]}
"""

import json
from pathlib import Path
from typing import Any

from pydantic import BaseModel, ConfigDict

from utils.crypto import HASH_BYTES, Blake2bHasher

from .core import Ledger
from .model import Event, Output, Tick, Tx


class TxSequence(BaseModel):
    """Genesis outputs plus the ordered transactions and ticks to validate."""

    model_config = ConfigDict(frozen=True)

    genesis: tuple[Output, ...] = ()
    events: tuple[Event, ...] = ()

    @property
    def transactions(self) -> list[Tx]:
        return [event for event in self.events if isinstance(event, Tx)]

    def fresh_ledger(self) -> Ledger:
        return Ledger(self.genesis)


def canonical_json(data: Any) -> str:
    return json.dumps(data, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def _dump(model: BaseModel) -> Any:
    return model.model_dump(mode="python")


def tx_to_json(tx: Tx) -> str:
    return canonical_json(_dump(tx))


def tx_bytes(tx: Tx) -> int:
    return len(tx_to_json(tx).encode("utf-8"))


def ledger_to_json(ledger: Ledger) -> str:
    return canonical_json(
        {
            "genesis": [_dump(output) for output in ledger.genesis],
            "txs": [_dump(tx) for tx in ledger.txs],
            "accounts": {str(ctr): dict(w.balances) for ctr, w in sorted(ledger.accounts.items())},
            "time": ledger.time,
        }
    )


def measure_ledger(ledger: Ledger) -> tuple[int, str]:
    """Return ``(byte size, hex digest)`` of the ledger's canonical JSON."""
    encoded = ledger_to_json(ledger).encode("utf-8")
    digest = Blake2bHasher().digest(encoded)
    return len(encoded), format(digest, f"0{2 * HASH_BYTES}x")


def ledger_bytes(ledger: Ledger) -> int:
    return measure_ledger(ledger)[0]


def ledger_digest(ledger: Ledger) -> str:
    return measure_ledger(ledger)[1]


def _event_to_data(event: Event) -> dict[str, Any]:
    if isinstance(event, Tick):
        return {"tick": event.time}
    return {"tx": _dump(event)}


def _event_from_data(data: dict[str, Any]) -> Event:
    if "tick" in data:
        return Tick(time=data["tick"])
    if "tx" in data:
        return Tx.model_validate(data["tx"])
    raise ValueError(f"Unknown sequence event: {sorted(data)}")


def sequence_to_json(sequence: TxSequence) -> str:
    return canonical_json(
        {
            "genesis": [_dump(output) for output in sequence.genesis],
            "events": [_event_to_data(event) for event in sequence.events],
        }
    )


def sequence_from_json(text: str) -> TxSequence:
    data = json.loads(text)
    return TxSequence(
        genesis=tuple(Output.model_validate(item) for item in data.get("genesis", [])),
        events=tuple(_event_from_data(item) for item in data.get("events", [])),
    )


def write_sequence(sequence: TxSequence, path: Path) -> int:
    """Write a sequence file, returning the number of bytes written."""
    text = sequence_to_json(sequence)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    return len(text.encode("utf-8"))


def read_sequence(path: Path) -> TxSequence:
    if not path.exists():
        raise FileNotFoundError(f"Sequence file not found: {path}")
    return sequence_from_json(path.read_text(encoding="utf-8"))
