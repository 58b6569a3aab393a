"""Outbound frame scheduling: data/MAC pairs, duplicates, delayed key release.

Each application message becomes a data frame and a MAC frame; both are
transmitted ``duplicates`` times to ride out channel loss.  Logical
packets (one per data frame, one per MAC frame, duplicates not counted)
fill fixed-size key intervals; crossing an interval boundary releases the
key from ``disclosure_delay`` intervals back, also duplicated.

Interval numbering starts at 1: index 0 is the committed anchor that
receivers are provisioned with, and it never authenticates traffic.
"""

from __future__ import annotations

from dataclasses import dataclass

from .crypto import KeyChain, derive_mac_key, hmac50, message_to_bytes
from .errors import ChainExhaustedError, ConfigError, WidthError
from .frame_codec import (
    DF_EXTENDED_SQUITTER,
    AuthPayload,
    Frame,
    PayloadKind,
    pack_payload,
)


@dataclass
class SenderConfig:
    chain: KeyChain
    icao: int
    disclosure_delay: int = 10   # intervals between a MAC's interval and its key release
    interval_len: int = 10       # logical packets per key interval
    duplicates: int = 2          # copies of every protocol frame
    df: int = DF_EXTENDED_SQUITTER
    capability: int = 5

    def __post_init__(self):
        if self.icao < 0 or self.icao >> 24:
            raise WidthError("icao", self.icao, 24)
        if self.disclosure_delay < 1:
            raise ConfigError("disclosure_delay must be >= 1")
        if self.interval_len < 1:
            raise ConfigError("interval_len must be >= 1")
        if self.duplicates < 1:
            raise ConfigError("duplicates must be >= 1")


@dataclass
class SenderState:
    current_interval: int = 1
    packets_in_interval: int = 0
    next_seq: int = 0
    last_mac_interval: int = 0   # newest interval that has authenticated a message


class Sender:
    """Frame scheduler for one transmitting aircraft."""

    def __init__(self, config: SenderConfig, state: SenderState | None = None):
        self.config = config
        self.state = state if state is not None else SenderState()

    def _frame(self, payload: AuthPayload) -> Frame:
        cfg = self.config
        return Frame.from_fields(cfg.df, cfg.capability, cfg.icao, pack_payload(payload))

    def emit_message(self, message: int) -> list[Frame]:
        """Emit one message: data copies, MAC copies, then any due key release.

        The MAC is computed under the current interval's derived MAC key.
        Raises ChainExhaustedError once the chain has no key left for the
        interval; the session must end.
        """
        cfg, st = self.config, self.state
        if st.current_interval >= cfg.chain.length:
            raise ChainExhaustedError(
                f"no chain key for interval {st.current_interval}"
            )
        interval_key = cfg.chain.key_at(st.current_interval)
        tag = hmac50(derive_mac_key(interval_key.bits), message_to_bytes(message))

        data = self._frame(AuthPayload(PayloadKind.DATA, message))
        mac = self._frame(AuthPayload(PayloadKind.MAC, tag))
        frames = [data] * cfg.duplicates + [mac] * cfg.duplicates

        st.next_seq += 1
        st.last_mac_interval = st.current_interval
        st.packets_in_interval += 2
        if st.packets_in_interval >= cfg.interval_len:
            st.current_interval += 1
            st.packets_in_interval = 0
            frames += self.disclose_key()
        return frames

    def disclose_key(self) -> list[Frame]:
        """Key frames for the interval ``disclosure_delay`` back, or nothing.

        Returns the empty list while the schedule has not yet reached the
        first release; a key is never released while its interval can
        still legitimately produce MACs.
        """
        cfg, st = self.config, self.state
        index = st.current_interval - cfg.disclosure_delay
        if index < 0 or index >= cfg.chain.length:
            return []
        key = cfg.chain.key_at(index)
        return [self._frame(AuthPayload(PayloadKind.KEY, key.bits))] * cfg.duplicates

    def finish_session(self) -> list[Frame]:
        """Run the release schedule forward until every used key is public.

        A receiver of the complete capture can then verify every message.
        Emits nothing if no message was ever sent.
        """
        cfg, st = self.config, self.state
        if st.last_mac_interval < 1:
            return []
        frames: list[Frame] = []
        while st.current_interval - cfg.disclosure_delay < st.last_mac_interval:
            st.current_interval += 1
            st.packets_in_interval = 0
            frames += self.disclose_key()
        return frames
