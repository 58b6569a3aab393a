"""Retroactive-key-publication authentication for ADS-B extended squitters.

The package splits along the protocol's natural seams:

- ``frame_codec``: 112-bit frame encode/decode, CRC-24, bounded error
  correction, payload packing, hex capture format.
- ``crypto``: 50-bit one-way key chains, domain-separated MAC key
  derivation, HMAC-SHA-256 tags truncated to 50 bits.
- ``sender``: data/MAC pair scheduling, duplicate transmission, delayed
  key release.
- ``receiver``: buffering, packet-count safety condition, chain-walking
  key acceptance, verdicts.
- ``channel_sim``: Poisson collision model for the shared channel, Monte
  Carlo cross-checks, loss/adversary end-to-end experiments.
- ``cli``: batch commands tying it together.
"""

from .channel_sim import (
    AdversaryConfig,
    CollisionParams,
    Scenario,
    SimResult,
    TrafficClass,
    monte_carlo_collision,
    p_collision_combined,
    p_collision_single,
    run_end_to_end,
    sweep_fig4,
)
from .crypto import (
    ChainKey,
    KeyChain,
    MacKey,
    chain_step,
    derive_mac_key,
    generate_chain,
    hmac50,
    verify_chain_link,
)
from .errors import ProtocolError
from .frame_codec import (
    AuthPayload,
    Frame,
    PayloadKind,
    crc24,
    decode_frame,
    encode_frame,
    pack_payload,
    unpack_payload,
)
from .receiver import Receiver, ReceiverConfig, ReceiverState, Verdict, VerdictStatus
from .sender import Sender, SenderConfig, SenderState

__version__ = "0.1.0"

__all__ = [
    "AdversaryConfig",
    "AuthPayload",
    "ChainKey",
    "CollisionParams",
    "Frame",
    "KeyChain",
    "MacKey",
    "PayloadKind",
    "ProtocolError",
    "Receiver",
    "ReceiverConfig",
    "ReceiverState",
    "Scenario",
    "Sender",
    "SenderConfig",
    "SenderState",
    "SimResult",
    "TrafficClass",
    "Verdict",
    "VerdictStatus",
    "chain_step",
    "crc24",
    "decode_frame",
    "derive_mac_key",
    "encode_frame",
    "generate_chain",
    "hmac50",
    "monte_carlo_collision",
    "p_collision_combined",
    "p_collision_single",
    "pack_payload",
    "run_end_to_end",
    "sweep_fig4",
    "unpack_payload",
    "verify_chain_link",
]
