"""Key-chain and MAC primitives for retroactive key publication.

Keys are 50-bit values linked into a one-way chain: ``chain_step``
(truncated SHA-256 with domain byte 0x00) maps each key to its
predecessor, so holding any key proves every earlier one.  The key used
for traffic authentication is never the chain key itself: ``derive_mac_key``
applies a second, domain-separated map (byte 0x01) and returns a distinct
MacKey type, which is the only key ``hmac50`` accepts.

Tags are HMAC-SHA-256 truncated to the leftmost 50 bits of the 256-bit
digest, so a blind forgery matches a given tag with probability 2^-50.

Bit packing: a 50-bit value occupies 7 bytes MSB-first with the low 6
bits of the final byte zero.  A 51-bit application message packs the same
way with 5 zero pad bits.  Hex serialization of keys and tags widens to
52 bits (13 hex chars, low 2 bits zero); chain seeds are 32 bytes
(64 hex chars).
"""

from __future__ import annotations

import hashlib
import hmac as _hmac
from dataclasses import dataclass

from .errors import DegenerateChainError, DepthExceededError, WidthError

KEY_BITS = 50
KEY_BYTES = 7
SEED_BYTES = 32
MESSAGE_BITS = 51

_DOMAIN_CHAIN = b"\x00"
_DOMAIN_MAC = b"\x01"

DEFAULT_MAX_CHAIN_DEPTH = 64


def _check_key_bits(bits: int) -> None:
    if not isinstance(bits, int) or bits < 0 or bits >> KEY_BITS:
        raise WidthError("key", bits, KEY_BITS)


def key_to_bytes(bits: int) -> bytes:
    """Pack 50 key bits MSB-first into 7 bytes, low 6 bits zero."""
    _check_key_bits(bits)
    return (bits << 6).to_bytes(KEY_BYTES, "big")


def message_to_bytes(message: int) -> bytes:
    """Pack a 51-bit application message MSB-first into 7 bytes."""
    if not isinstance(message, int) or message < 0 or message >> MESSAGE_BITS:
        raise WidthError("message", message, MESSAGE_BITS)
    return (message << 5).to_bytes(KEY_BYTES, "big")


def truncate50(digest: bytes) -> int:
    """Leftmost 50 bits of a digest as an integer."""
    return int.from_bytes(digest[:KEY_BYTES], "big") >> 6


def chain_step(bits: int) -> int:
    """One-way step toward the chain anchor (domain byte 0x00)."""
    return truncate50(hashlib.sha256(key_to_bytes(bits) + _DOMAIN_CHAIN).digest())


def chain_walk(bits: int, steps: int) -> int:
    """Apply chain_step ``steps`` times."""
    for _ in range(steps):
        bits = chain_step(bits)
    return bits


@dataclass(frozen=True)
class ChainKey:
    """A chain key and its position; index 0 is the committed anchor."""

    bits: int
    index: int

    def __post_init__(self):
        _check_key_bits(self.bits)
        if self.index < 0:
            raise ValueError(f"negative chain index {self.index}")


@dataclass(frozen=True)
class MacKey:
    """Traffic-authentication key derived from a chain key; never a chain key."""

    bits: int

    def __post_init__(self):
        _check_key_bits(self.bits)


def derive_mac_key(bits: int) -> MacKey:
    """Domain-separated map from a chain key to its MAC key (byte 0x01)."""
    return MacKey(truncate50(hashlib.sha256(key_to_bytes(bits) + _DOMAIN_MAC).digest()))


@dataclass(frozen=True)
class KeyChain:
    """Ordered keys K_0..K_N with K_{i-1} = chain_step(K_i)."""

    seed: bytes
    keys: tuple[ChainKey, ...]

    @property
    def length(self) -> int:
        return len(self.keys)

    @property
    def anchor(self) -> ChainKey:
        return self.keys[0]

    def key_at(self, index: int) -> ChainKey:
        if not 0 <= index < len(self.keys):
            raise IndexError(f"chain index {index} outside 0..{len(self.keys) - 1}")
        return self.keys[index]


def generate_chain(seed: bytes, n: int) -> KeyChain:
    """Derive the full chain K_0..K_n from a 256-bit seed.

    K_n is the truncated SHA-256 of the seed; every earlier key is one
    chain_step down.  Deterministic: the same (seed, n) always reproduces
    the identical chain.
    """
    if len(seed) != SEED_BYTES:
        raise WidthError("seed", len(seed) * 8, SEED_BYTES * 8)
    if n < 1:
        raise DegenerateChainError("chain needs at least one key beyond the anchor")
    bits = [0] * (n + 1)
    bits[n] = truncate50(hashlib.sha256(seed).digest())
    for i in range(n, 0, -1):
        bits[i - 1] = chain_step(bits[i])
    return KeyChain(seed, tuple(ChainKey(b, i) for i, b in enumerate(bits)))


def verify_chain_link(
    candidate: int,
    trusted: ChainKey,
    v: int,
    max_depth: int = DEFAULT_MAX_CHAIN_DEPTH,
) -> bool:
    """Check that walking ``v`` steps down from candidate reaches the trusted key."""
    _check_key_bits(candidate)
    if v < 1:
        raise ValueError(f"chain distance must be >= 1, got {v}")
    if v > max_depth:
        raise DepthExceededError(f"chain distance {v} exceeds limit {max_depth}")
    return chain_walk(candidate, v) == trusted.bits


def hmac_sha256_tag(mac_key: MacKey, message: bytes) -> bytes:
    """Full 256-bit keyed tag over the message.

    Standard two-pass construction (outer pad 0x5c, inner pad 0x36, 64-byte
    block); the 7-byte packed key is zero-padded to the block size.
    """
    if not isinstance(mac_key, MacKey):
        raise TypeError("tags are computed under a derived MacKey, never a chain key")
    return _hmac.new(key_to_bytes(mac_key.bits), message, hashlib.sha256).digest()


def hmac50(mac_key: MacKey, message: bytes) -> int:
    """Leftmost 50 bits of the keyed tag; the on-air MAC body."""
    return truncate50(hmac_sha256_tag(mac_key, message))


def tags_equal(a: int, b: int) -> bool:
    """Constant-time comparison of two 50-bit tags."""
    return _hmac.compare_digest(
        (a << 6).to_bytes(KEY_BYTES, "big"), (b << 6).to_bytes(KEY_BYTES, "big")
    )


def key_to_hex(bits: int) -> str:
    """13 hex chars: the 50 bits widened to 52 with two zero pad bits."""
    _check_key_bits(bits)
    return format(bits << 2, "013x")


def key_from_hex(text: str) -> int:
    """Inverse of key_to_hex; rejects wrong widths and nonzero pad bits."""
    if len(text) != 13:
        raise WidthError("key hex", len(text), 13)
    value = int(text, 16)
    if value & 0x3:
        raise WidthError("key hex pad", value, KEY_BITS)
    return value >> 2


def seed_to_hex(seed: bytes) -> str:
    if len(seed) != SEED_BYTES:
        raise WidthError("seed", len(seed) * 8, SEED_BYTES * 8)
    return seed.hex()


def seed_from_hex(text: str) -> bytes:
    seed = bytes.fromhex(text)
    if len(seed) != SEED_BYTES:
        raise WidthError("seed", len(seed) * 8, SEED_BYTES * 8)
    return seed
