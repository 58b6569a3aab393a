"""Key chain and MAC tests against direct SHA-256 reference computations.

The keyed-hash reference here is built from raw sha256 calls with explicit
pads; the library side uses the standard library construction.  Keeping
the two routes separate is the point of these tests.
"""

import hashlib
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adsbauth.crypto import (
    ChainKey,
    MacKey,
    chain_step,
    chain_walk,
    derive_mac_key,
    generate_chain,
    hmac50,
    hmac_sha256_tag,
    key_from_hex,
    key_to_bytes,
    key_to_hex,
    message_to_bytes,
    truncate50,
    verify_chain_link,
)
from adsbauth.errors import DegenerateChainError, DepthExceededError, WidthError


def _ref_trunc50(digest: bytes) -> int:
    return int.from_bytes(digest[:7], "big") >> 6


def _ref_chain_step(bits: int) -> int:
    packed = (bits << 6).to_bytes(7, "big")
    return _ref_trunc50(hashlib.sha256(packed + b"\x00").digest())


def _ref_mac_key(bits: int) -> int:
    packed = (bits << 6).to_bytes(7, "big")
    return _ref_trunc50(hashlib.sha256(packed + b"\x01").digest())


def _ref_keyed_hash(key: bytes, message: bytes) -> bytes:
    """Two-pass construction from first principles: pads 0x36/0x5c, 64-byte block."""
    assert len(key) <= 64
    block = key + bytes(64 - len(key))
    inner = hashlib.sha256(bytes(b ^ 0x36 for b in block) + message).digest()
    return hashlib.sha256(bytes(b ^ 0x5C for b in block) + inner).digest()


class TestOneWayFunctions:
    def test_deterministic(self):
        key = 0x3FFFFFFFFFFFF
        assert chain_step(key) == chain_step(key)
        assert derive_mac_key(key) == derive_mac_key(key)

    def test_chain_step_zero_frozen(self):
        # leftmost 50 bits of sha256(seven zero bytes || 0x00)
        assert chain_step(0) == 0x2BD55C3D68604
        assert chain_step(0) == _ref_chain_step(0)

    def test_mac_derivation_zero_frozen(self):
        assert derive_mac_key(0).bits == 0x33499885539B5
        assert derive_mac_key(0).bits == _ref_mac_key(0)
        assert derive_mac_key(0).bits != chain_step(0)

    def test_against_reference_random_keys(self):
        rng = random.Random(0xFACE)
        for _ in range(500):
            key = rng.getrandbits(50)
            assert chain_step(key) == _ref_chain_step(key)
            assert derive_mac_key(key).bits == _ref_mac_key(key)

    def test_no_fixed_points_observed(self):
        rng = random.Random(0xF1C5)
        for _ in range(10_000):
            key = rng.getrandbits(50)
            assert chain_step(key) != key

    def test_domain_separation_statistical(self):
        rng = random.Random(0x5E9)
        for _ in range(10_000):
            key = rng.getrandbits(50)
            assert derive_mac_key(key).bits != key
            assert derive_mac_key(key).bits != chain_step(key)

    def test_width_violations(self):
        with pytest.raises(WidthError):
            chain_step(1 << 50)
        with pytest.raises(WidthError):
            key_to_bytes(-1)

    def test_packing_rule(self):
        # MSB-first into 7 bytes, low 6 bits of the final byte zero
        assert key_to_bytes((1 << 50) - 1) == b"\xff\xff\xff\xff\xff\xff\xc0"
        assert key_to_bytes(1) == bytes(6) + b"\x40"
        assert message_to_bytes(1) == bytes(6) + b"\x20"


class TestKeyChain:
    def test_single_link_definition(self):
        seed = b"\x42" * 32
        chain = generate_chain(seed, 1)
        top = truncate50(hashlib.sha256(seed).digest())
        assert chain.keys[1].bits == top
        assert chain.keys[0].bits == _ref_chain_step(top)
        assert chain.length == 2

    def test_regeneration_identical(self):
        seed = bytes(range(32))
        assert generate_chain(seed, 40) == generate_chain(seed, 40)

    def test_adjacent_links(self):
        chain = generate_chain(b"\x07" * 32, 32)
        for i in range(1, 33):
            assert chain_step(chain.keys[i].bits) == chain.keys[i - 1].bits

    def test_all_pairs_link(self):
        chain = generate_chain(b"\x3c" * 32, 32)
        for i in range(1, 33):
            for j in range(i):
                assert verify_chain_link(chain.keys[i].bits, chain.keys[j], i - j)

    def test_degenerate_chain(self):
        with pytest.raises(DegenerateChainError):
            generate_chain(bytes(32), 0)

    def test_bad_seed_width(self):
        with pytest.raises(WidthError):
            generate_chain(bytes(31), 4)


class TestVerifyChainLink:
    def test_adjacent(self):
        chain = generate_chain(b"\x99" * 32, 8)
        assert verify_chain_link(chain.keys[5].bits, chain.keys[4], 1)

    def test_exact_distance_only(self):
        chain = generate_chain(b"\x5a" * 32, 8)
        assert verify_chain_link(chain.keys[6].bits, chain.keys[3], 3)
        assert not verify_chain_link(chain.keys[6].bits, chain.keys[3], 2)

    def test_random_candidates_rejected(self):
        chain = generate_chain(b"\x21" * 32, 4)
        trusted = chain.keys[2]
        rng = random.Random(0xD1CE)
        hits = sum(
            verify_chain_link(rng.getrandbits(50), trusted, 1) for _ in range(100_000)
        )
        assert hits == 0

    def test_depth_limit(self):
        chain = generate_chain(b"\x11" * 32, 4)
        with pytest.raises(DepthExceededError):
            verify_chain_link(chain.keys[3].bits, chain.keys[0], 65)
        with pytest.raises(ValueError):
            verify_chain_link(chain.keys[3].bits, chain.keys[0], 0)


class TestHmac50:
    def test_matches_reference_vectors(self):
        cases = [
            (0x2AAAAAAAAAAAA, b"position report 0001"),
            (0x0000000000001, b""),
            (0x3FFFFFFFFFFFF, bytes(range(64)) * 3),  # message longer than a block
            (0x1234567890ABC, b"\x00" * 7),
            (0x0DEADBEEF0123, b"altitude 38000 heading 270"),
        ]
        for key_bits, message in cases:
            mac_key = MacKey(key_bits)
            full = hmac_sha256_tag(mac_key, message)
            assert full == _ref_keyed_hash(key_to_bytes(key_bits), message)
            assert hmac50(mac_key, message) == _ref_trunc50(full)

    def test_frozen_vector(self):
        tag = hmac_sha256_tag(MacKey(0x2AAAAAAAAAAAA), b"position report 0001")
        assert tag.hex() == (
            "a06bd3ac8ec8f57a06793f52dbb69f6c928295704eade58f26ffadd8bfcd3e0b"
        )
        assert hmac50(MacKey(0x2AAAAAAAAAAAA), b"position report 0001") == 0x281AF4EB23B23

    def test_truncation_is_leftmost_50(self):
        rng = random.Random(0x7A9)
        for _ in range(200):
            mac_key = MacKey(rng.getrandbits(50))
            message = rng.randbytes(rng.randrange(0, 40))
            full = hmac_sha256_tag(mac_key, message)
            assert hmac50(mac_key, message) == int.from_bytes(full[:7], "big") >> 6

    def test_avalanche_on_message_bit_flip(self):
        rng = random.Random(0xABE)
        for _ in range(10_000):
            mac_key = MacKey(rng.getrandbits(50))
            message = rng.getrandbits(51)
            flipped = message ^ (1 << rng.randrange(51))
            assert hmac50(mac_key, message_to_bytes(message)) != hmac50(
                mac_key, message_to_bytes(flipped)
            )

    def test_rejects_raw_chain_keys(self):
        # structural two-key independence: a chain key is not a MAC key
        with pytest.raises(TypeError):
            hmac_sha256_tag(0x123, b"x")  # type: ignore[arg-type]
        with pytest.raises(TypeError):
            hmac_sha256_tag(ChainKey(0x123, 1), b"x")  # type: ignore[arg-type]


def test_forgery_bound_million_random_tags():
    # fixed (key, message); no uniformly random 50-bit tag may match
    import numpy as np

    mac_key = MacKey(0x1B2C3D4E5F607)
    genuine = hmac50(mac_key, b"fixed message under test")
    rng = np.random.default_rng(0xF0E9E5)
    candidates = rng.integers(0, 1 << 50, size=1_000_000, dtype=np.uint64)
    assert int(np.count_nonzero(candidates == genuine)) == 0


@given(st.integers(0, (1 << 50) - 1), st.integers(1, 20))
@settings(max_examples=50)
def test_chain_walk_composes(bits, steps):
    assert chain_walk(bits, steps) == chain_walk(chain_step(bits), steps - 1)


class TestHexSerialization:
    def test_round_trip(self):
        rng = random.Random(0x4E1)
        for _ in range(500):
            bits = rng.getrandbits(50)
            text = key_to_hex(bits)
            assert len(text) == 13
            assert key_from_hex(text) == bits

    def test_low_two_bits_zero(self):
        assert key_to_hex(0x3FFFFFFFFFFFF) == "ffffffffffffc"
        with pytest.raises(WidthError):
            key_from_hex("fffffffffffff")  # nonzero pad
        with pytest.raises(WidthError):
            key_from_hex("ff")
