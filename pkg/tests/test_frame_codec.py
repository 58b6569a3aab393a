"""Frame codec tests against an independent bitwise long-division CRC oracle."""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adsbauth.errors import (
    CaptureFormatError,
    FrameIntegrityError,
    UnknownPayloadError,
    WidthError,
)
from adsbauth.frame_codec import (
    DF_EXTENDED_SQUITTER,
    TC_KEY,
    AuthPayload,
    Frame,
    PayloadKind,
    crc24,
    decode_frame,
    encode_frame,
    frame_to_hexline,
    pack_payload,
    parse_hexline,
    unpack_payload,
)

# Oracle: schoolbook polynomial long division, bit by bit.  Written first;
# the table-driven implementation is checked against it, never the reverse.
_GEN_BITS = [1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 1, 0, 0, 0, 0, 0, 0, 1, 0, 0, 1]


def crc24_longdiv(bits: list[int]) -> int:
    assert len(bits) == 88
    work = list(bits) + [0] * 24
    for i in range(88):
        if work[i]:
            for j, g in enumerate(_GEN_BITS):
                work[i + j] ^= g
    return int("".join(map(str, work[88:])), 2)


def _bits_of(value: int, width: int) -> list[int]:
    return [(value >> (width - 1 - i)) & 1 for i in range(width)]


def _random_frame(rng: random.Random) -> Frame:
    return Frame.from_fields(
        rng.getrandbits(5), rng.getrandbits(3), rng.getrandbits(24), rng.getrandbits(56)
    )


class TestCrc24:
    def test_zero_payload(self):
        assert crc24(bytes(11)) == 0x000000
        assert crc24_longdiv([0] * 88) == 0x000000

    def test_lowest_bit_frozen_value(self):
        # x^0 * x^24 mod g is the generator word itself
        payload = bytes(10) + b"\x01"
        assert crc24_longdiv([0] * 87 + [1]) == 0xFFF409
        assert crc24(payload) == 0xFFF409

    def test_matches_longdiv_oracle(self):
        rng = random.Random(0xC24)
        for _ in range(1000):
            value = rng.getrandbits(88)
            assert crc24(value.to_bytes(11, "big")) == crc24_longdiv(_bits_of(value, 88))

    def test_linearity(self):
        rng = random.Random(0x11EA)
        for _ in range(1000):
            a, b = rng.getrandbits(88), rng.getrandbits(88)
            ca = crc24(a.to_bytes(11, "big"))
            cb = crc24(b.to_bytes(11, "big"))
            cab = crc24((a ^ b).to_bytes(11, "big"))
            assert cab == ca ^ cb

    def test_wrong_width(self):
        with pytest.raises(WidthError):
            crc24(bytes(10))
        with pytest.raises(WidthError):
            crc24(bytes(12))


class TestEncodeFrame:
    def test_all_zero_fields(self):
        raw = encode_frame(0, 0, 0, 0)
        assert raw[:11] == bytes(11)
        assert int.from_bytes(raw[11:], "big") == crc24_longdiv([0] * 88)

    def test_parity_against_oracle_frozen(self):
        raw = encode_frame(DF_EXTENDED_SQUITTER, 5, 0xABCDEF, 0)
        assert int.from_bytes(raw[11:], "big") == 0xB8A543  # long-division oracle
        head = (17 << 83) | (5 << 80) | (0xABCDEF << 56)
        assert int.from_bytes(raw[11:], "big") == crc24_longdiv(_bits_of(head, 88))

    def test_round_trip_random_tuples(self):
        rng = random.Random(0xF00)
        for _ in range(1000):
            frame = _random_frame(rng)
            decoded, corrected = decode_frame(frame.to_bytes(), 0)
            assert decoded == frame
            assert corrected == 0

    def test_field_out_of_range(self):
        with pytest.raises(WidthError):
            encode_frame(32, 0, 0, 0)
        with pytest.raises(WidthError):
            encode_frame(17, 8, 0, 0)
        with pytest.raises(WidthError):
            encode_frame(17, 5, 1 << 24, 0)
        with pytest.raises(WidthError):
            encode_frame(17, 5, 0, 1 << 56)


@given(
    df=st.integers(0, 31),
    capability=st.integers(0, 7),
    icao=st.integers(0, (1 << 24) - 1),
    me=st.integers(0, (1 << 56) - 1),
)
@settings(max_examples=300)
def test_round_trip_property(df, capability, icao, me):
    frame = Frame.from_fields(df, capability, icao, me)
    decoded, corrected = decode_frame(frame.to_bytes(), 0)
    assert decoded == frame and corrected == 0


class TestDecodeCorrection:
    def test_single_bit_syndromes_distinct(self):
        clean = encode_frame(17, 5, 0x4840D6, 0x202CC371C32CE0)
        syndromes = set()
        for pos in range(112):
            flipped = bytearray(clean)
            flipped[pos // 8] ^= 1 << (7 - pos % 8)
            syndromes.add(crc24(bytes(flipped[:11])) ^ int.from_bytes(flipped[11:], "big"))
        assert len(syndromes) == 112

    def test_single_bit_corrected_all_positions(self):
        frame = Frame.from_fields(17, 5, 0x4840D6, 0x202CC371C32CE0)
        clean = frame.to_bytes()
        for pos in range(112):
            corrupted = bytearray(clean)
            corrupted[pos // 8] ^= 1 << (7 - pos % 8)
            decoded, corrected = decode_frame(bytes(corrupted), 1)
            assert decoded == frame, f"bit {pos}"
            assert corrected == 1

    def test_single_bit_rejected_when_correction_off(self):
        clean = Frame.from_fields(17, 5, 0x4840D6, 0).to_bytes()
        corrupted = bytearray(clean)
        corrupted[3] ^= 0x10
        with pytest.raises(FrameIntegrityError):
            decode_frame(bytes(corrupted), 0)

    def test_burst_errors_within_window(self):
        # up to 5 flips inside one 24-bit window are the designed correctable case
        rng = random.Random(0xB0B)
        frame = Frame.from_fields(17, 5, 0xC0FFEE, 0x0123456789ABCD)
        clean = int.from_bytes(frame.to_bytes(), "big")
        recovered = 0
        for _ in range(300):
            start = rng.randrange(0, 89)
            weight = rng.randint(2, 5)
            positions = rng.sample(range(start, start + 24), weight)
            vector = 0
            for pos in positions:
                vector |= 1 << (111 - pos)
            corrupted = (clean ^ vector).to_bytes(14, "big")
            try:
                decoded, corrected = decode_frame(corrupted, 5)
            except FrameIntegrityError:
                continue  # ambiguous syndrome; conservative reject is allowed
            assert decoded == frame
            assert corrected == weight
            recovered += 1
        assert recovered > 200  # the window search should usually succeed

    def test_six_random_flips_never_silently_valid(self):
        # 10^4 trials: a 6-bit error must never decode as clean (0 corrected)
        rng = random.Random(0x6B17)
        frame = Frame.from_fields(17, 5, 0x4840D6, 0x58C382D690C8AC)
        clean = int.from_bytes(frame.to_bytes(), "big")
        false_clean = 0
        for _ in range(10_000):
            positions = rng.sample(range(112), 6)
            vector = 0
            for pos in positions:
                vector |= 1 << (111 - pos)
            corrupted = (clean ^ vector).to_bytes(14, "big")
            try:
                decoded, corrected = decode_frame(corrupted, 5)
            except FrameIntegrityError:
                continue
            if corrected == 0:
                false_clean += 1
        assert false_clean == 0

    def test_max_correctable_bounds(self):
        clean = Frame.from_fields(17, 5, 0, 0).to_bytes()
        with pytest.raises(ValueError):
            decode_frame(clean, 6)
        with pytest.raises(WidthError):
            decode_frame(clean[:13], 1)


class TestPayloads:
    def test_key_payload_zero_body(self):
        me = pack_payload(AuthPayload(PayloadKind.KEY, 0))
        assert me == TC_KEY << 51

    def test_round_trip_all_kinds(self):
        rng = random.Random(0xAA)
        for _ in range(1000):
            for kind in PayloadKind:
                payload = AuthPayload(kind, rng.getrandbits(kind.body_bits))
                assert unpack_payload(pack_payload(payload)) == payload

    def test_mac_body_bit_placement(self):
        tag = (1 << 49) | 0b1011  # MSB and a few low bits
        me = pack_payload(AuthPayload(PayloadKind.MAC, tag))
        # bits 5..54 of the ME hold the tag, bit 55 is the zero pad
        assert (me >> 1) & ((1 << 50) - 1) == tag
        assert me & 1 == 0

    def test_unknown_type_code(self):
        with pytest.raises(UnknownPayloadError):
            unpack_payload(3 << 51)
        with pytest.raises(UnknownPayloadError):
            unpack_payload(31 << 51)

    def test_nonzero_pad_bit_rejected(self):
        with pytest.raises(UnknownPayloadError):
            unpack_payload((TC_KEY << 51) | 1)

    def test_body_width_mismatch(self):
        with pytest.raises(WidthError):
            pack_payload(AuthPayload(PayloadKind.KEY, 1 << 50))
        with pytest.raises(WidthError):
            pack_payload(AuthPayload(PayloadKind.DATA, 1 << 51))


class TestHexCapture:
    def test_line_round_trip(self):
        frame = Frame.from_fields(17, 5, 0xABCDEF, 0x00FF00FF00FF00)
        line = frame_to_hexline(frame, 123456)
        raw, stamp = parse_hexline(line)
        assert raw == frame.to_bytes()
        assert stamp == 123456

    def test_line_without_timestamp(self):
        frame = Frame.from_fields(17, 5, 0, 0)
        raw, stamp = parse_hexline(frame_to_hexline(frame))
        assert raw == frame.to_bytes()
        assert stamp is None

    def test_malformed_lines(self):
        for bad in ["", "deadbeef", "g" * 28, "0" * 27, "0" * 28 + ";x", "0" * 29]:
            with pytest.raises(CaptureFormatError):
                parse_hexline(bad)
