"""Receive-side authentication: buffering, key acceptance, and verdicts.

A receiver holds one trusted anchor key per transmitter and advances a
``newest_key`` as disclosed keys are authenticated by walking the one-way
chain back to a key it already trusts.  Message/MAC pairs are buffered
until a key that can verify them has been disclosed and authenticated.

Safety against retroactive forgery is enforced by packet counting, not
wall time.  The receiver's clock for one transmitter is its own count of
logical protocol packets; combining that count with the last observed key
release gives ``on_air_key_head``, the newest key index that can already
be public.  A MAC can only ever validate under a key index strictly above
the head observed when the MAC arrived: tags made with an already-public
key are worthless, whoever sends them.

Because the air frames have no room for an interval number, a buffered
entry's interval is discovered rather than declared: when keys become
available the entry is tried against every index in its safe window
(exclusive lower bound at its arrival head).  Entries that exhaust their
window are rejected; as a diagnostic, a rejected tag that *does* verify
under an already-public key is labelled Dropped-Unsafe (a replay) rather
than Invalid (a plain mismatch or forgery).

At the end of a capture, still-undecided complete entries are reported
Invalid: their keys were never published, so nothing vouches for them.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .crypto import (
    DEFAULT_MAX_CHAIN_DEPTH,
    ChainKey,
    chain_step,
    derive_mac_key,
    hmac50,
    message_to_bytes,
    tags_equal,
)
from .errors import ConfigError, InvalidKeyError, UnknownPayloadError, WidthError
from .frame_codec import DF_EXTENDED_SQUITTER, Frame, PayloadKind, unpack_payload


class VerdictStatus(Enum):
    VALID = "valid"
    INVALID = "invalid"
    DROPPED_UNSAFE = "dropped_unsafe"
    EXPIRED_UNPAIRED = "expired_unpaired"


@dataclass(frozen=True)
class Verdict:
    icao: int
    seq: int
    message: int
    status: VerdictStatus
    interval: int | None


@dataclass
class ReceiverConfig:
    disclosure_delay: int = 10
    interval_len: int = 10
    max_chain_depth: int = DEFAULT_MAX_CHAIN_DEPTH
    max_buffer: int = 256
    # Extra key intervals an undecided entry may wait beyond the nominal
    # delay before it is forced to a verdict; covers runs of lost releases.
    decision_grace: int = 16
    # How many already-public key indexes to probe when labelling replays.
    replay_probe: int = 10
    df: int = DF_EXTENDED_SQUITTER

    def __post_init__(self):
        if self.disclosure_delay < 1 or self.interval_len < 1:
            raise ConfigError("disclosure_delay and interval_len must be >= 1")
        if self.max_buffer < 1:
            raise ConfigError("max_buffer must be >= 1")

    @property
    def packets_per_interval(self) -> int:
        # interval_len data/MAC packets plus the key release itself
        return self.interval_len + 1


@dataclass
class BufferedEntry:
    seq: int
    message: int
    arrival_order: int
    smac: int | None = None
    # on_air_key_head at the moment the MAC attached; keys at or below it
    # were potentially public and can never validate this entry.
    attach_head: int | None = None
    presumed_interval: int | None = None


@dataclass
class ReceiverStats:
    duplicates: int = 0
    non_protocol: int = 0
    orphan_macs: int = 0
    invalid_keys: int = 0
    old_keys: int = 0


class ReceiverState:
    """Authentication state machine for one transmitter (one ICAO)."""

    def __init__(self, icao: int, anchor: ChainKey, config: ReceiverConfig | None = None):
        if icao < 0 or icao >> 24:
            raise WidthError("icao", icao, 24)
        self.icao = icao
        self.anchor = anchor
        self.newest_key = anchor
        self.config = config if config is not None else ReceiverConfig()
        self.l = 0                # logical protocol packets seen from this ICAO
        self.l_at_key = 0         # value of l when newest_key last advanced
        self.buffer: list[BufferedEntry] = []
        self.stats = ReceiverStats()
        self._seen_frames: set[bytes] = set()
        self._derived: dict[int, int] = {anchor.index: anchor.bits}
        self._old_key_bits: set[int] | None = None
        self._next_seq = 0

    # -- clocks -------------------------------------------------------

    def on_air_key_head(self) -> int:
        """Newest key index that can already be public, by packet counting.

        Once a release has been authenticated it pins the schedule: every
        further interval's worth of received packets implies one more
        release has happened on air whether or not this receiver caught
        it.  Before the first release the estimate runs from the schedule
        start instead (the sender begins one interval past the anchor and
        the first release lags by the disclosure delay).
        """
        elapsed = (self.l - self.l_at_key) // self.config.packets_per_interval
        if self.newest_key.index == self.anchor.index:
            est_interval = self.anchor.index + 1 + elapsed
            return max(self.anchor.index, est_interval - self.config.disclosure_delay)
        return self.newest_key.index + elapsed

    def safety_check(self, entry_interval: int) -> bool:
        """True iff the key for this interval cannot yet have been published."""
        return entry_interval > self.on_air_key_head()

    # -- key handling ---------------------------------------------------

    def _known_old_keys(self) -> set[int]:
        if self._old_key_bits is None:
            bits = self.newest_key.bits
            old = set()
            for _ in range(self.config.max_chain_depth):
                bits = chain_step(bits)
                old.add(bits)
            self._old_key_bits = old
        return self._old_key_bits

    def accept_key(self, candidate: int) -> int:
        """Authenticate a disclosed key against the chain; returns newest index.

        A candidate that chains down onto newest_key within max_chain_depth
        steps advances it (recovering any number of lost releases up to the
        depth limit).  Re-offers of the current or older keys are ignored.
        Anything else raises InvalidKeyError.
        """
        if candidate < 0 or candidate >> 50:
            raise WidthError("key", candidate, 50)
        if candidate == self.newest_key.bits or candidate in self._known_old_keys():
            return self.newest_key.index
        bits = candidate
        for v in range(1, self.config.max_chain_depth + 1):
            bits = chain_step(bits)
            if bits == self.newest_key.bits:
                self.newest_key = ChainKey(candidate, self.newest_key.index + v)
                self._derived[self.newest_key.index] = candidate
                self._old_key_bits = None
                return self.newest_key.index
        raise InvalidKeyError(
            f"candidate does not reach the trusted chain within "
            f"{self.config.max_chain_depth} steps"
        )

    def _key_bits_at(self, index: int) -> int:
        """Chain key bits for an index at or below newest_key, memoized."""
        if not self.anchor.index <= index <= self.newest_key.index:
            raise IndexError(f"key index {index} not derivable yet")
        known = index
        while known not in self._derived:
            known += 1
        bits = self._derived[known]
        for i in range(known - 1, index - 1, -1):
            bits = chain_step(bits)
            self._derived[i] = bits
        return self._derived[index]

    # -- frame intake -----------------------------------------------------

    def on_frame(self, frame: Frame, position: int) -> list[Verdict]:
        """Process one cleanly decoded frame; returns any verdicts it settles."""
        if frame.df != self.config.df:
            self.stats.non_protocol += 1
            return []
        raw = frame.to_bytes()
        if raw in self._seen_frames:
            self.stats.duplicates += 1
            return []
        self._seen_frames.add(raw)
        try:
            payload = unpack_payload(frame.me)
        except UnknownPayloadError:
            self.stats.non_protocol += 1
            return []

        self.l += 1
        if payload.kind is PayloadKind.DATA:
            return self._on_data(payload.body, position)
        if payload.kind is PayloadKind.MAC:
            return self._on_mac(payload.body)
        return self._on_key(payload.body)

    def _on_data(self, message: int, position: int) -> list[Verdict]:
        verdicts: list[Verdict] = []
        if len(self.buffer) >= self.config.max_buffer:
            verdicts.append(self._evict_one())
        entry = BufferedEntry(seq=self._next_seq, message=message, arrival_order=position)
        self._next_seq += 1
        self.buffer.append(entry)
        return verdicts

    def _on_mac(self, tag: int) -> list[Verdict]:
        entry = next((e for e in reversed(self.buffer) if e.smac is None), None)
        if entry is None:
            self.stats.orphan_macs += 1
            return []
        head = self.on_air_key_head()
        presumed = head + self.config.disclosure_delay
        if not self.safety_check(presumed):
            self.buffer.remove(entry)
            return [self._verdict(entry, VerdictStatus.DROPPED_UNSAFE, None)]
        entry.smac = tag
        entry.attach_head = head
        entry.presumed_interval = presumed
        return []

    def _on_key(self, candidate: int) -> list[Verdict]:
        before = self.newest_key.index
        try:
            index = self.accept_key(candidate)
        except InvalidKeyError:
            self.stats.invalid_keys += 1
            return []
        if index == before:
            self.stats.old_keys += 1
            return []
        self.l_at_key = self.l
        self._seen_frames.clear()
        return self.authenticate_buffered(index)

    # -- verification ----------------------------------------------------

    def _try_tag(self, entry: BufferedEntry, index: int) -> bool:
        mac_key = derive_mac_key(self._key_bits_at(index))
        return tags_equal(hmac50(mac_key, message_to_bytes(entry.message)), entry.smac)

    def authenticate_buffered(self, key_index: int) -> list[Verdict]:
        """Settle buffered entries now that keys up to key_index are derivable.

        Complete entries are tried against every derivable index in their
        safe window, most likely interval first.  Entries whose window is
        exhausted are decided: Dropped-Unsafe when the tag verifies under a
        key that was already public at arrival, Invalid otherwise.  Entries
        still without a MAC expired with the interval that just closed.
        """
        cfg = self.config
        verdicts: list[Verdict] = []
        remaining: list[BufferedEntry] = []
        for entry in self.buffer:
            if entry.smac is None:
                verdicts.append(self._verdict(entry, VerdictStatus.EXPIRED_UNPAIRED, None))
                continue
            window_end = entry.attach_head + cfg.disclosure_delay + cfg.decision_grace
            matched = self._match_in_window(entry, key_index, window_end)
            if matched is not None:
                verdicts.append(self._verdict(entry, VerdictStatus.VALID, matched))
            elif key_index >= window_end:
                verdicts.append(self._decide_failed(entry))
            else:
                remaining.append(entry)
        self.buffer = remaining
        return verdicts

    def _match_in_window(
        self, entry: BufferedEntry, key_index: int, window_end: int
    ) -> int | None:
        low = max(entry.attach_head, self.anchor.index)
        high = min(key_index, window_end)
        if entry.presumed_interval is not None and low < entry.presumed_interval <= high:
            if self._try_tag(entry, entry.presumed_interval):
                return entry.presumed_interval
        for index in range(low + 1, high + 1):
            if index == entry.presumed_interval:
                continue
            if self._try_tag(entry, index):
                return index
        return None

    def _decide_failed(self, entry: BufferedEntry) -> Verdict:
        # probe the already-public keys this receiver can actually derive;
        # a hit means the tag was made with a disclosed key: a replay
        probe_high = min(entry.attach_head, self.newest_key.index)
        probe_low = max(self.anchor.index, probe_high - self.config.replay_probe + 1)
        for index in range(probe_low, probe_high + 1):
            if self._try_tag(entry, index):
                return self._verdict(entry, VerdictStatus.DROPPED_UNSAFE, index)
        return self._verdict(entry, VerdictStatus.INVALID, entry.presumed_interval)

    def _evict_one(self) -> Verdict:
        victim = next((e for e in self.buffer if e.smac is None), self.buffer[0])
        self.buffer.remove(victim)
        return self._verdict(victim, VerdictStatus.EXPIRED_UNPAIRED, None)

    def finalize(self) -> list[Verdict]:
        """End of capture: every still-buffered entry gets its one verdict."""
        verdicts = []
        for entry in self.buffer:
            if entry.smac is None:
                verdicts.append(self._verdict(entry, VerdictStatus.EXPIRED_UNPAIRED, None))
            else:
                verdicts.append(self._decide_failed(entry))
        self.buffer = []
        return verdicts

    def _verdict(self, entry: BufferedEntry, status: VerdictStatus, interval: int | None) -> Verdict:
        return Verdict(
            icao=self.icao,
            seq=entry.seq,
            message=entry.message,
            status=status,
            interval=interval,
        )


@dataclass
class ReceiverSummary:
    valid: int = 0
    invalid: int = 0
    dropped_unsafe: int = 0
    expired: int = 0
    unverifiable: int = 0
    malformed: int = 0

    def count(self, verdict: Verdict) -> None:
        if verdict.status is VerdictStatus.VALID:
            self.valid += 1
        elif verdict.status is VerdictStatus.INVALID:
            self.invalid += 1
        elif verdict.status is VerdictStatus.DROPPED_UNSAFE:
            self.dropped_unsafe += 1
        else:
            self.expired += 1

    def as_dict(self) -> dict[str, int]:
        return {
            "valid": self.valid,
            "invalid": self.invalid,
            "dropped_unsafe": self.dropped_unsafe,
            "expired": self.expired,
            "unverifiable": self.unverifiable,
            "malformed": self.malformed,
        }


class Receiver:
    """Demultiplexes frames to per-ICAO state machines.

    Transmitters without a provisioned anchor are counted as unverifiable
    and otherwise ignored; all per-transmitter state is fully isolated.
    """

    def __init__(self, config: ReceiverConfig | None = None):
        self.config = config if config is not None else ReceiverConfig()
        self.states: dict[int, ReceiverState] = {}
        self.summary = ReceiverSummary()

    def add_anchor(self, icao: int, anchor: ChainKey) -> None:
        self.states[icao] = ReceiverState(icao, anchor, self.config)

    def on_frame(self, frame: Frame, position: int) -> list[Verdict]:
        state = self.states.get(frame.icao)
        if state is None:
            self.summary.unverifiable += 1
            return []
        verdicts = state.on_frame(frame, position)
        for verdict in verdicts:
            self.summary.count(verdict)
        return verdicts

    def finalize(self) -> list[Verdict]:
        verdicts = []
        for icao in sorted(self.states):
            for verdict in self.states[icao].finalize():
                self.summary.count(verdict)
                verdicts.append(verdict)
        return verdicts
