"""
Tests for canonical encoding, hashing and signature accounting (src/utils/crypto.py).
"""

import pytest

from utils.crypto import (
    MAX_H,
    MIN_H,
    Blake2bHasher,
    HashCollisionError,
    SignatureVerifier,
    TableHasher,
    encode_canonical,
    get_hasher,
    hash_hex,
    hash_value,
    use_hasher,
)


class TestEncodeCanonical:
    """Tests for the canonical byte encoding."""

    def test_bool_and_int_differ(self):
        """Test that True and 1 get different encodings."""
        assert encode_canonical(True) != encode_canonical(1)
        assert encode_canonical(False) != encode_canonical(0)

    def test_layout_is_tag_length_payload(self):
        """Test the tag byte and 4-byte length prefix."""
        assert encode_canonical("ab") == b"S\x00\x00\x00\x02ab"
        assert encode_canonical(True) == b"B\x00\x00\x00\x01\x01"

    def test_lists_and_tuples_encode_alike(self):
        """Test that sequences are encoded by content, not by type."""
        assert encode_canonical([1, "x", (True,)]) == encode_canonical((1, "x", [True]))

    def test_negative_integers_encode(self):
        """Test that negative integers round to two's complement bytes."""
        assert encode_canonical(-1) == b"I\x00\x00\x00\x01\xff"

    def test_unsupported_type_raises(self):
        """Test that floats are rejected."""
        with pytest.raises(TypeError):
            encode_canonical(1.5)


class TestHashing:
    """Tests for the pluggable hashers."""

    def test_blake2b_is_deterministic_and_in_range(self):
        """Test that hashes are stable and avoid the sentinels."""
        value = hash_value(("var_x",))

        assert value == hash_value(("var_x",))
        assert MIN_H < value < MAX_H

    def test_hash_hex_is_full_width(self):
        """Test that hex digests are zero padded to 128 characters."""
        assert len(hash_hex((1, 2))) == 128

    def test_table_hasher_pins_values(self):
        """Test that pinned preimages get their table value and others fall back."""
        table = {b"pinned": 42}

        with use_hasher(TableHasher(table)):
            assert get_hasher().digest(b"pinned") == 42
            assert get_hasher().digest(b"other") == Blake2bHasher().digest(b"other")

        assert isinstance(get_hasher(), Blake2bHasher)

    def test_table_hasher_rejects_sentinels(self):
        """Test that pinned values must lie strictly inside (MIN_H, MAX_H)."""
        with pytest.raises(ValueError):
            TableHasher({b"x": MIN_H})

    def test_sentinel_digest_raises(self, mocker):
        """Test that a digest equal to a sentinel is reported as a collision."""
        digest = mocker.patch("utils.crypto.hashes.Hash").return_value
        digest.finalize.return_value = b"\x00" * 64

        with pytest.raises(HashCollisionError):
            Blake2bHasher().digest(b"anything")


class TestSignatureVerifier:
    """Tests for counted Ed25519 verification."""

    def test_each_verify_is_counted(self, verifier):
        """Test that every successful verification bumps the counter."""
        assert verifier.verify("alice")
        assert verifier.verify("bob")

        assert verifier.verified == 2

    def test_reset_returns_previous_count(self, verifier):
        """Test that reset zeroes the counter."""
        verifier.verify("alice")

        assert verifier.reset() == 1
        assert verifier.verified == 0

    def test_independent_verifiers_have_own_counters(self):
        """Test that verifiers do not share counters."""
        first, second = SignatureVerifier(), SignatureVerifier()
        first.verify("alice")

        assert second.verified == 0
