"""
Hashing, canonical encoding and signature verification.

Every hash that feeds a script check (contract ids, state keys, the ``hash``
builtin of contracts) goes through this module:

1. ``encode_canonical`` turns booleans, integers, strings and (nested)
   sequences into bytes. Each value is one tag byte (``B``, ``I``, ``S``,
   ``L``) followed by a 4-byte big-endian payload length and the payload.
   Integers are two's-complement big-endian, strings UTF-8, sequences the
   concatenation of their elements' encodings.
2. Hash values are 512-bit digests read as big-endian unsigned integers, so
   integer order is byte order. ``MIN_H`` and ``MAX_H`` are the excluded
   all-zero and all-one sentinels.
3. The active hasher is pluggable (``use_hasher``) so tests can pin the key
   ordering with a ``TableHasher``.
4. ``SignatureVerifier`` verifies one fixed Ed25519 signature per signer and
   counts the verifications.
"""

import logging
import threading
from collections.abc import Iterator, Mapping
from contextlib import contextmanager
from typing import Any, Protocol

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives import hashes
from cryptography.hazmat.primitives.asymmetric import ed25519

logger = logging.getLogger(__name__)

HASH_BYTES = 64
MIN_H = 0
MAX_H = (1 << (8 * HASH_BYTES)) - 1


class HashCollisionError(RuntimeError):
    """Raised when a digest hits a sentinel or two preimages share a hash."""


def encode_canonical(value: Any) -> bytes:
    """
    Encode a value into its canonical byte form.

    Args:
        value: bool, int, str, or a tuple/list of such values (nested allowed).

    Returns:
        Canonical bytes.

    Raises:
        TypeError: If the value has an unsupported type.
    """
    if isinstance(value, bool):
        tag, payload = b"B", b"\x01" if value else b"\x00"
    elif isinstance(value, int):
        size = max(1, (value.bit_length() + 8) // 8)
        tag, payload = b"I", value.to_bytes(size, "big", signed=True)
    elif isinstance(value, str):
        tag, payload = b"S", value.encode("utf-8")
    elif isinstance(value, (tuple, list)):
        tag, payload = b"L", b"".join(encode_canonical(item) for item in value)
    else:
        raise TypeError(f"Cannot canonically encode value of type {type(value).__name__}")
    return tag + len(payload).to_bytes(4, "big") + payload


class Hasher(Protocol):
    """Anything that maps bytes to a hash value in (MIN_H, MAX_H)."""

    name: str

    def digest(self, data: bytes) -> int: ...


class Blake2bHasher:
    """BLAKE2b-512 hasher."""

    name = "blake2b-512"

    def digest(self, data: bytes) -> int:
        h = hashes.Hash(hashes.BLAKE2b(HASH_BYTES))
        h.update(data)
        value = int.from_bytes(h.finalize(), "big")
        if value in (MIN_H, MAX_H):
            raise HashCollisionError(f"Digest of {data!r} hit a reserved sentinel")
        return value


class TableHasher:
    """
    Deterministic hasher with pinned values for chosen preimages.

    Preimages missing from the table fall back to another hasher
    (BLAKE2b-512 by default).
    """

    name = "table"

    def __init__(self, table: Mapping[bytes, int], fallback: Hasher | None = None):
        for preimage, value in table.items():
            if not MIN_H < value < MAX_H:
                raise ValueError(f"Pinned hash for {preimage!r} is outside (MIN_H, MAX_H)")
        self.table = dict(table)
        self.fallback = fallback or Blake2bHasher()

    def digest(self, data: bytes) -> int:
        pinned = self.table.get(data)
        if pinned is not None:
            return pinned
        return self.fallback.digest(data)


_active_hasher: Hasher = Blake2bHasher()


def get_hasher() -> Hasher:
    """Return the active hasher."""
    return _active_hasher


def set_hasher(hasher: Hasher) -> Hasher:
    """Install a hasher and return the previous one."""
    global _active_hasher
    previous = _active_hasher
    _active_hasher = hasher
    logger.debug(f"Hasher switched from {previous.name} to {hasher.name}")
    return previous


@contextmanager
def use_hasher(hasher: Hasher) -> Iterator[Hasher]:
    """Temporarily install a hasher."""
    previous = set_hasher(hasher)
    try:
        yield hasher
    finally:
        set_hasher(previous)


def hash_bytes(data: bytes) -> int:
    """Hash raw bytes with the active hasher."""
    return _active_hasher.digest(data)


def hash_value(value: Any) -> int:
    """Hash the canonical encoding of a value."""
    return _active_hasher.digest(encode_canonical(value))


def hash_hex(value: Any) -> str:
    """Hex form of ``hash_value``, zero-padded to the full digest width."""
    return format(hash_value(value), f"0{2 * HASH_BYTES}x")


class SignatureVerifier:
    """
    Simulated signature checks.

    One keypair and one signature over a fixed message are created up front;
    each ``verify`` call runs a real Ed25519 verification of that signature
    and bumps a thread-safe counter.
    """

    MESSAGE = b"hutxosim: fixed message for signature cost accounting"

    def __init__(self) -> None:
        self._private_key = ed25519.Ed25519PrivateKey.generate()
        self._public_key = self._private_key.public_key()
        self._signature = self._private_key.sign(self.MESSAGE)
        self._lock = threading.Lock()
        self._verified = 0

    @property
    def verified(self) -> int:
        """Number of successful verifications so far."""
        with self._lock:
            return self._verified

    def verify(self, signer: str) -> bool:
        """Verify the fixed signature on behalf of ``signer``."""
        try:
            self._public_key.verify(self._signature, self.MESSAGE)
        except InvalidSignature:
            logger.warning(f"❌ Signature check failed for {signer}")
            return False
        with self._lock:
            self._verified += 1
        return True

    def reset(self) -> int:
        """Zero the counter, returning its previous value."""
        with self._lock:
            previous, self._verified = self._verified, 0
        return previous


_default_verifier: SignatureVerifier | None = None
_verifier_lock = threading.Lock()


def get_signature_verifier() -> SignatureVerifier:
    """Return the process-wide verifier, creating it on first use."""
    global _default_verifier
    with _verifier_lock:
        if _default_verifier is None:
            _default_verifier = SignatureVerifier()
        return _default_verifier
