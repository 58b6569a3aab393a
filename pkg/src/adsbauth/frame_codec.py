"""Bit-exact codec for 112-bit ADS-B extended squitter frames.

Frame layout, MSB-first within every field and across the frame:

    DF (5) | CA (3) | ICAO (24) | ME (56) | parity (24)

The parity field is the Mode-S CRC-24 of the first 88 bits: generator
0xFFF409 (x^24 + x^23 + ... + x^10 + x^3 + 1), zero initial register, no
reflection, no final xor.  A well-formed frame therefore leaves a zero
remainder when divided as a single 112-bit polynomial.

The 56-bit ME field carries the authentication payloads: a 5-bit type
code followed by a 51-bit body.  Application data uses the full 51 bits;
50-bit MAC tags and chain keys are left-aligned, trailing bit zero.

Hex capture format (shared with the CLI and the channel simulator): one
frame per line, 28 lowercase hex characters, optional ``;<microseconds>``
suffix with a decimal timestamp.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .errors import (
    CaptureFormatError,
    FrameIntegrityError,
    UnknownPayloadError,
    WidthError,
)

GENERATOR = 0xFFF409          # Mode-S CRC-24 generator, degree-24 term implicit
_GENERATOR_FULL = 0x1FFF409   # with the x^24 term, for shifting remainders

FRAME_BITS = 112
FRAME_BYTES = 14
PROTECTED_BITS = 88           # bits covered by the parity field
PROTECTED_BYTES = 11
PARITY_BITS = 24
ME_BITS = 56
DATA_BODY_BITS = 51
TAG_BODY_BITS = 50

# 17 is the downlink format used on air for the extended squitter.  Some
# writeups quote the DF as the hex literal 0x17 (= 23), which also fits the
# 5-bit field; it is kept available as an explicit alternative constant.
DF_EXTENDED_SQUITTER = 17
DF_EXTENDED_SQUITTER_HEX_LITERAL = 0x17

# Type codes from the reserved block, repurposed to tag the payload kinds.
TC_DATA = 25
TC_MAC = 26
TC_KEY = 27


def _check_width(name: str, value: int, bits: int) -> None:
    if not isinstance(value, int) or value < 0 or value >> bits:
        raise WidthError(name, value, bits)


def _build_crc_table() -> list[int]:
    table = []
    for byte in range(256):
        reg = byte << 16
        for _ in range(8):
            if reg & 0x800000:
                reg = ((reg << 1) ^ GENERATOR) & 0xFFFFFF
            else:
                reg = (reg << 1) & 0xFFFFFF
        table.append(reg)
    return table


_CRC_TABLE = _build_crc_table()


def crc24(payload: bytes) -> int:
    """CRC-24 of the 88-bit protected portion of a frame.

    Remainder of payload * x^24 divided by the generator.  Linear in the
    payload: crc24(a xor b) == crc24(a) xor crc24(b).
    """
    if len(payload) != PROTECTED_BYTES:
        raise WidthError("payload", len(payload) * 8, PROTECTED_BITS)
    reg = 0
    for byte in payload:
        reg = ((reg << 8) ^ _CRC_TABLE[((reg >> 16) ^ byte) & 0xFF]) & 0xFFFFFF
    return reg


@dataclass(frozen=True)
class Frame:
    """One decoded 112-bit extended squitter frame."""

    df: int
    capability: int
    icao: int
    me: int
    parity: int

    @classmethod
    def from_fields(cls, df: int, capability: int, icao: int, me: int) -> "Frame":
        """Build a well-formed frame, computing the parity field."""
        raw = encode_frame(df, capability, icao, me)
        return cls(df, capability, icao, me, int.from_bytes(raw[11:14], "big"))

    @property
    def type_code(self) -> int:
        return self.me >> 51

    def to_bytes(self) -> bytes:
        word = (
            (self.df << 107)
            | (self.capability << 104)
            | (self.icao << 80)
            | (self.me << 24)
            | self.parity
        )
        return word.to_bytes(FRAME_BYTES, "big")

    def to_hex(self) -> str:
        return self.to_bytes().hex()


def encode_frame(df: int, capability: int, icao: int, me: int) -> bytes:
    """Serialize the four leading fields and append their CRC-24 parity."""
    _check_width("df", df, 5)
    _check_width("capability", capability, 3)
    _check_width("icao", icao, 24)
    _check_width("me", me, ME_BITS)
    head = (df << 83) | (capability << 80) | (icao << 56) | me
    protected = head.to_bytes(PROTECTED_BYTES, "big")
    return protected + crc24(protected).to_bytes(3, "big")


def _parse(raw: bytes) -> Frame:
    return Frame(
        df=raw[0] >> 3,
        capability=raw[0] & 0x7,
        icao=int.from_bytes(raw[1:4], "big"),
        me=int.from_bytes(raw[4:11], "big"),
        parity=int.from_bytes(raw[11:14], "big"),
    )


def _bit_syndrome(position: int) -> int:
    """Syndrome produced by flipping a single bit of an otherwise clean frame."""
    if position >= PROTECTED_BITS:
        return 1 << (FRAME_BITS - 1 - position)
    buf = bytearray(PROTECTED_BYTES)
    buf[position // 8] |= 1 << (7 - position % 8)
    return crc24(bytes(buf))


_SINGLE_BIT = {_bit_syndrome(pos): pos for pos in range(FRAME_BITS)}


def _burst_candidates(syndrome: int, max_weight: int) -> set[int]:
    """Error vectors of weight 2..max_weight confined to a sliding 24-bit window.

    Walking the window one bit to the left multiplies the required pattern
    by x^-1 modulo the generator (the generator's constant term makes x
    invertible).  Candidates are returned as 112-bit error vectors.
    """
    found: set[int] = set()
    pattern = syndrome  # window aligned with the parity field
    for start in range(PROTECTED_BITS, -1, -1):
        if 2 <= bin(pattern).count("1") <= max_weight:
            found.add(pattern << (PROTECTED_BITS - start))
        if pattern & 1:
            pattern = (pattern ^ _GENERATOR_FULL) >> 1
        else:
            pattern >>= 1
    return found


def decode_frame(bits: bytes, max_correctable: int = 1) -> tuple[Frame, int]:
    """Parse a received frame, optionally correcting transmission errors.

    Returns the frame and the number of corrected bits.  Correction is
    conservative: single-bit errors resolve through a syndrome table;
    heavier errors (up to ``max_correctable`` <= 5 bits) are accepted only
    when they fit a contiguous 24-bit burst window and the window search
    yields exactly one candidate pattern.  Ambiguous or unmatched
    syndromes raise FrameIntegrityError so the caller can drop the frame.
    """
    if len(bits) != FRAME_BYTES:
        raise WidthError("frame", len(bits) * 8, FRAME_BITS)
    if not 0 <= max_correctable <= 5:
        raise ValueError(f"max_correctable={max_correctable} outside 0..5")

    syndrome = crc24(bits[:PROTECTED_BYTES]) ^ int.from_bytes(bits[11:14], "big")
    if syndrome == 0:
        return _parse(bits), 0

    if max_correctable >= 1 and syndrome in _SINGLE_BIT:
        pos = _SINGLE_BIT[syndrome]
        fixed = bytearray(bits)
        fixed[pos // 8] ^= 1 << (7 - pos % 8)
        return _parse(bytes(fixed)), 1

    if max_correctable >= 2:
        candidates = _burst_candidates(syndrome, max_correctable)
        if len(candidates) == 1:
            vector = candidates.pop()
            word = int.from_bytes(bits, "big") ^ vector
            fixed = word.to_bytes(FRAME_BYTES, "big")
            if crc24(fixed[:PROTECTED_BYTES]) == int.from_bytes(fixed[11:14], "big"):
                return _parse(fixed), bin(vector).count("1")

    raise FrameIntegrityError(f"uncorrectable frame, syndrome {syndrome:06x}")


class PayloadKind(Enum):
    DATA = TC_DATA
    MAC = TC_MAC
    KEY = TC_KEY

    @property
    def body_bits(self) -> int:
        return DATA_BODY_BITS if self is PayloadKind.DATA else TAG_BODY_BITS


_TYPE_CODES = {kind.value: kind for kind in PayloadKind}


@dataclass(frozen=True)
class AuthPayload:
    """Decoded ME contents: a payload kind plus its 50- or 51-bit body."""

    kind: PayloadKind
    body: int


def pack_payload(payload: AuthPayload) -> int:
    """Pack a payload into a 56-bit ME word, body left-aligned after the TC."""
    _check_width("body", payload.body, payload.kind.body_bits)
    body = payload.body
    if payload.kind is not PayloadKind.DATA:
        body <<= 1  # 50-bit body left-aligned in 51 bits, pad bit zero
    return (payload.kind.value << 51) | body


def unpack_payload(me: int) -> AuthPayload:
    """Inverse of pack_payload; rejects MEs that are not protocol payloads."""
    _check_width("me", me, ME_BITS)
    kind = _TYPE_CODES.get(me >> 51)
    if kind is None:
        raise UnknownPayloadError(f"type code {me >> 51} is not a protocol payload")
    body = me & ((1 << 51) - 1)
    if kind is not PayloadKind.DATA:
        if body & 1:
            raise UnknownPayloadError("nonzero pad bit in tag payload")
        body >>= 1
    return AuthPayload(kind, body)


def frame_to_hexline(frame: Frame, timestamp_us: int | None = None) -> str:
    """Render one capture line: 28 lowercase hex chars, optional timestamp."""
    line = frame.to_hex()
    if timestamp_us is not None:
        line += f";{timestamp_us}"
    return line


def parse_hexline(line: str) -> tuple[bytes, int | None]:
    """Parse a capture line into raw frame bytes and an optional timestamp."""
    text = line.strip()
    body, sep, stamp = text.partition(";")
    if len(body) != 2 * FRAME_BYTES:
        raise CaptureFormatError(f"expected {2 * FRAME_BYTES} hex chars, got {len(body)}")
    try:
        raw = bytes.fromhex(body)
    except ValueError as exc:
        raise CaptureFormatError(f"bad hex in capture line: {body!r}") from exc
    timestamp = None
    if sep:
        if not stamp.isdigit():
            raise CaptureFormatError(f"bad timestamp suffix: {stamp!r}")
        timestamp = int(stamp)
    return raw, timestamp
