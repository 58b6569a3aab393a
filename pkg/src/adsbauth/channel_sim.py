"""Collision modeling for the shared 1090 MHz channel, plus protocol experiments.

Transmitters fire independently, so arrivals inside one vulnerability
window are Poisson.  With n aircraft each sending a t_p-second packet
every T seconds, the per-window mean is lam = n * t_p / T and

    P(collision) = P(arrivals >= 2) = 1 - e^-lam - lam * e^-lam.

With two traffic classes sharing the channel (legacy Mode-S replies and
extended squitters), the counts are independent Poissons and the channel
is clear only for (0,0), (0,1) and (1,0) arrivals:

    P(collision) = 1 - P_A(0)P_S(0) - P_A(0)P_S(1) - P_A(1)P_S(0),

which is P(Poisson(lam_A + lam_S) >= 2).  One bit lasts one microsecond;
the 8 us synchronization preamble can be counted into the vulnerability
window or left out (bare packet bits only).

The Monte Carlo cross-check has two modes: ``counts`` draws the per-window
Poisson counts directly (the acceptance oracle for the formulas), while
``timeline`` lays packets on a continuous time axis and tests exact
interval overlap (exploratory; measures the unslotted channel the formula
approximates, so it is expected to sit near, not on, the analytic curve).
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

import numpy as np

from .crypto import derive_mac_key, generate_chain, hmac50, message_to_bytes
from .errors import ConfigError
from .frame_codec import AuthPayload, Frame, PayloadKind, pack_payload, unpack_payload
from .receiver import Receiver, ReceiverConfig, VerdictStatus
from .sender import Sender, SenderConfig

US_PER_BIT = 1.0
PREAMBLE_US = 8.0
MODE_S_BITS = 112
ADSB_BITS = 120

# Periodic position/velocity plus slower status traffic averages 4.2
# messages per second per aircraft; the recommended ceiling is 6.2.
AVERAGE_RATE_PER_SEC = 4.2
MAX_RATE_PER_SEC = 6.2

_MC_CHUNK = 1 << 18


@dataclass(frozen=True)
class TrafficClass:
    name: str
    packet_bits: int
    rate_per_aircraft: float     # packets per second per aircraft (1/T)
    preamble_us: float = PREAMBLE_US

    def __post_init__(self):
        if self.packet_bits <= 0:
            raise ConfigError("packet_bits must be positive")
        if self.rate_per_aircraft < 0:
            raise ConfigError("rate_per_aircraft must be >= 0")

    def window_us(self, include_preamble: bool = True) -> float:
        us = self.packet_bits * US_PER_BIT
        if include_preamble:
            us += self.preamble_us
        return us


def mode_s_class(rate: float = MAX_RATE_PER_SEC) -> TrafficClass:
    return TrafficClass("ModeS", MODE_S_BITS, rate)


def adsb_class(rate: float = MAX_RATE_PER_SEC) -> TrafficClass:
    return TrafficClass("ADSB", ADSB_BITS, rate)


@dataclass(frozen=True)
class CollisionParams:
    n: int
    classes: tuple[TrafficClass, ...]
    rate_multiplier: float = 1.0
    include_preamble: bool = True

    def __post_init__(self):
        if self.n < 0:
            raise ConfigError("aircraft count must be >= 0")
        if self.rate_multiplier <= 0:
            raise ConfigError("rate_multiplier must be positive")
        if not 1 <= len(self.classes) <= 2:
            raise ConfigError("expected one or two traffic classes")

    def lambdas(self) -> list[float]:
        return [
            self.n
            * (cls.window_us(self.include_preamble) * 1e-6)
            * (cls.rate_per_aircraft * self.rate_multiplier)
            for cls in self.classes
        ]


def _p_at_least_two(lam: float) -> float:
    """P(Poisson(lam) >= 2), series-expanded for tiny means."""
    if lam < 0:
        raise ValueError(f"negative mean {lam}")
    if lam < 1e-4:
        return lam * lam * (0.5 - lam / 3.0 + lam * lam / 8.0)
    return 1.0 - math.exp(-lam) * (1.0 + lam)


def p_collision_single(n: int, t_p_us: float, T_s: float) -> float:
    """Analytic collision probability for one traffic class.

    ``t_p_us`` is the vulnerability window in microseconds, ``T_s`` the
    per-aircraft transmission period in seconds (so the rate is 1/T).
    """
    if n < 0:
        raise ValueError("aircraft count must be >= 0")
    if t_p_us <= 0 or T_s <= 0:
        raise ValueError("packet duration and period must be positive")
    return _p_at_least_two(n * (t_p_us * 1e-6) / T_s)


def p_collision_combined(params: CollisionParams) -> float:
    """Analytic collision probability with both classes on the channel."""
    if len(params.classes) != 2:
        raise ConfigError("combined model needs exactly two traffic classes")
    lam_a, lam_s = params.lambdas()
    return _p_at_least_two(lam_a + lam_s)


@dataclass
class AuthStats:
    valid: int = 0
    invalid: int = 0
    dropped_unsafe: int = 0
    expired: int = 0
    forged_accepted: int = 0

    def as_dict(self) -> dict[str, int]:
        return {
            "valid": self.valid,
            "invalid": self.invalid,
            "dropped_unsafe": self.dropped_unsafe,
            "expired": self.expired,
            "forged_accepted": self.forged_accepted,
        }


@dataclass(frozen=True)
class SimResult:
    analytic_p: float
    empirical_p: float
    trials: int
    ci95_halfwidth: float
    auth_stats: AuthStats | None = None


def _ci95(p_hat: float, trials: int) -> float:
    return 1.96 * math.sqrt(p_hat * (1.0 - p_hat) / trials)


def monte_carlo_collision(
    params: CollisionParams,
    trials: int,
    rng_seed: int,
    mode: str = "counts",
    timeline_horizon_us: float = 1e6,
) -> SimResult:
    """Empirical collision probability, deterministic for a fixed seed.

    Trial streams are derived from (rng_seed, chunk index), so the result
    does not depend on execution order or the degree of parallelism.
    """
    if trials < 1:
        raise ConfigError("trials must be >= 1")
    if mode not in ("counts", "timeline"):
        raise ConfigError(f"unknown Monte Carlo mode {mode!r}")

    lams = params.lambdas()
    analytic = _p_at_least_two(sum(lams))

    if mode == "counts":
        hits = 0
        done = 0
        chunk_index = 0
        while done < trials:
            size = min(_MC_CHUNK, trials - done)
            rng = np.random.default_rng(
                np.random.SeedSequence(entropy=rng_seed, spawn_key=(chunk_index,))
            )
            total = np.zeros(size, dtype=np.int64)
            for lam in lams:
                total += rng.poisson(lam, size)
            hits += int(np.count_nonzero(total >= 2))
            done += size
            chunk_index += 1
        p_hat = hits / trials
    else:
        p_hat = _timeline_fraction(params, trials, rng_seed, timeline_horizon_us)

    return SimResult(analytic, p_hat, trials, _ci95(p_hat, trials))


def _timeline_fraction(
    params: CollisionParams, trials: int, rng_seed: int, horizon_us: float
) -> float:
    """Fraction of simulated packets that overlap another transmission."""
    collided = 0
    total = 0
    for trial in range(trials):
        rng = np.random.default_rng(
            np.random.SeedSequence(entropy=rng_seed, spawn_key=(1, trial))
        )
        starts = []
        ends = []
        for cls, lam_rate in zip(params.classes, params.lambdas()):
            # lam_rate is per-window; recover the absolute arrival rate
            window_s = cls.window_us(params.include_preamble) * 1e-6
            rate_per_s = lam_rate / window_s if window_s > 0 else 0.0
            count = rng.poisson(rate_per_s * horizon_us * 1e-6)
            s = rng.uniform(0.0, horizon_us, count)
            starts.append(s)
            ends.append(s + cls.window_us(params.include_preamble))
        start = np.concatenate(starts) if starts else np.empty(0)
        end = np.concatenate(ends) if ends else np.empty(0)
        if start.size == 0:
            continue
        order = np.argsort(start, kind="stable")
        start, end = start[order], end[order]
        overlap = np.zeros(start.size, dtype=bool)
        running_end = np.maximum.accumulate(end)
        overlap[1:] = start[1:] < running_end[:-1]
        overlap[:-1] |= overlap[1:]  # the earlier packet of a clashing pair
        collided += int(np.count_nonzero(overlap))
        total += int(start.size)
    return collided / total if total else 0.0


@dataclass(frozen=True)
class Scenario:
    name: str
    classes: tuple[TrafficClass, ...]
    rate_multiplier: float = 1.0
    include_preamble: bool = True

    def params(self, n: int) -> CollisionParams:
        return CollisionParams(n, self.classes, self.rate_multiplier, self.include_preamble)


def paper_scenarios(rate_multipliers: tuple[float, ...] = (1.5, 2.0)) -> list[Scenario]:
    """Mode-S alone, both classes at base rate, then increased rates."""
    scenarios = [
        Scenario("mode_s_only", (mode_s_class(),)),
        Scenario("mode_s_plus_adsb", (mode_s_class(), adsb_class())),
    ]
    for mult in rate_multipliers:
        scenarios.append(
            Scenario(f"combined_x{mult:g}", (mode_s_class(), adsb_class()), mult)
        )
    return scenarios


CSV_HEADER = "scenario,n,analytic_p,empirical_p,trials,ci95"


def sweep_fig4(
    n_range: list[int],
    scenarios: list[Scenario],
    trials: int = 100_000,
    rng_seed: int = 0,
) -> str:
    """CSV sweep of analytic and empirical collision probability over n."""
    lines = [CSV_HEADER]
    for row, (scenario, n) in enumerate(
        (s, n) for s in scenarios for n in n_range
    ):
        params = scenario.params(n)
        lams = params.lambdas()
        analytic = _p_at_least_two(sum(lams))
        result = monte_carlo_collision(
            params, trials, rng_seed=_derive_seed(rng_seed, row)
        )
        lines.append(
            f"{scenario.name},{n},{analytic:.9g},{result.empirical_p:.9g},"
            f"{trials},{result.ci95_halfwidth:.9g}"
        )
    return "\n".join(lines) + "\n"


def _derive_seed(rng_seed: int, index: int) -> int:
    ss = np.random.SeedSequence(entropy=rng_seed, spawn_key=(2, index))
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass
class AdversaryConfig:
    """Rates for the on-path attacker; it sees every frame and disclosed key."""

    forge_rate: float = 0.0    # forged data/MAC pairs with random tags, per message
    modify_rate: float = 0.0   # in-flight data modification (parity recomputed)
    replay_rate: float = 0.0   # MACs recomputed under a just-disclosed key, per release


class Adversary:
    """Dolev-Yao attacker on the broadcast channel; cannot invert the chain."""

    def __init__(self, config: AdversaryConfig, rng: random.Random):
        self.config = config
        self.rng = rng
        self.injected: set[tuple[int, int]] = set()  # (icao, message) it created
        self.frames_sent = 0
        self._tampered: dict[bytes, Frame] = {}
        self._passed: set[bytes] = set()

    def _pair(self, template: Frame, message: int, tag: int) -> list[Frame]:
        data = Frame.from_fields(
            template.df, template.capability, template.icao,
            pack_payload(AuthPayload(PayloadKind.DATA, message)),
        )
        mac = Frame.from_fields(
            template.df, template.capability, template.icao,
            pack_payload(AuthPayload(PayloadKind.MAC, tag)),
        )
        self.injected.add((template.icao, message))
        self.frames_sent += 2
        return [data, mac]

    def forge_mac(self, template: Frame) -> list[Frame]:
        """A fresh message under a tag the attacker simply guesses."""
        return self._pair(
            template, self.rng.getrandbits(51), self.rng.getrandbits(50)
        )

    def modify_data(self, frame: Frame) -> Frame:
        """Flip message bits in flight, fixing the parity so the CRC passes.

        Duplicate copies of a frame are tampered identically, as a real
        on-path modification of the message would affect every copy.
        """
        raw = frame.to_bytes()
        if raw not in self._tampered:
            payload = unpack_payload(frame.me)
            flip = self.rng.getrandbits(51) or 1
            self._tampered[raw] = Frame.from_fields(
                frame.df, frame.capability, frame.icao,
                pack_payload(AuthPayload(PayloadKind.DATA, payload.body ^ flip)),
            )
            self.injected.add((frame.icao, payload.body ^ flip))
        self.frames_sent += 1
        return self._tampered[raw]

    def maybe_modify(self, frame: Frame) -> Frame:
        """Roll the modify decision once per distinct data frame."""
        raw = frame.to_bytes()
        if raw in self._tampered:
            return self.modify_data(frame)
        if raw in self._passed:
            return frame
        if self.rng.random() < self.config.modify_rate:
            return self.modify_data(frame)
        self._passed.add(raw)
        return frame

    def replay_after_disclosure(self, template: Frame, disclosed_key: int) -> list[Frame]:
        """Recompute a MAC with a key the sender has already published."""
        message = self.rng.getrandbits(51)
        tag = hmac50(derive_mac_key(disclosed_key), message_to_bytes(message))
        return self._pair(template, message, tag)


def run_end_to_end(
    n_aircraft: int,
    per_copy_loss: float,
    adversary: AdversaryConfig | None,
    duration_packets: int,
    rng_seed: int,
    disclosure_delay: int = 10,
    interval_len: int = 10,
    duplicates: int = 2,
) -> SimResult:
    """Drive full sender/channel/receiver sessions and tally verdicts.

    Every aircraft gets a fresh chain; one receiver is provisioned with all
    anchors.  Each emitted frame copy is lost independently with
    probability per_copy_loss; the adversary injects or tampers per its
    configured rates.  forged_accepted counts attacker-created messages
    that were judged Valid (the protocol's promise is that this stays 0).
    """
    if not 0 <= per_copy_loss < 1:
        raise ConfigError("per_copy_loss must be in [0, 1)")
    if n_aircraft < 1 or duration_packets < 2:
        raise ConfigError("need at least one aircraft and one packet pair")

    master = random.Random(rng_seed)
    chain_rng = random.Random(master.getrandbits(64))
    loss_rng = random.Random(master.getrandbits(64))
    adv_rng = random.Random(master.getrandbits(64))
    msg_rng = random.Random(master.getrandbits(64))

    messages_per_aircraft = max(1, duration_packets // (2 * n_aircraft))
    per_interval = max(1, interval_len // 2)
    chain_len = (messages_per_aircraft + per_interval - 1) // per_interval + 1

    receiver = Receiver(
        ReceiverConfig(disclosure_delay=disclosure_delay, interval_len=interval_len)
    )
    senders: list[Sender] = []
    for k in range(n_aircraft):
        chain = generate_chain(chain_rng.randbytes(32), chain_len)
        config = SenderConfig(
            chain=chain,
            icao=0xA00000 + k,
            disclosure_delay=disclosure_delay,
            interval_len=interval_len,
            duplicates=duplicates,
        )
        senders.append(Sender(config))
        receiver.add_anchor(config.icao, chain.anchor)

    stream: list[Frame] = []
    honest_messages = 0
    for _ in range(messages_per_aircraft):
        for sender in senders:
            message = msg_rng.getrandbits(51)
            stream.extend(sender.emit_message(message))
            honest_messages += 1
    for sender in senders:
        stream.extend(sender.finish_session())

    surviving = [f for f in stream if loss_rng.random() >= per_copy_loss]

    adv = Adversary(adversary or AdversaryConfig(), adv_rng)
    delivered: list[Frame] = []
    for frame in surviving:
        payload = unpack_payload(frame.me)
        if payload.kind is PayloadKind.DATA:
            delivered.append(adv.maybe_modify(frame))
            continue
        delivered.append(frame)
        if payload.kind is PayloadKind.MAC and adv_rng.random() < adv.config.forge_rate:
            delivered.extend(adv.forge_mac(frame))
        if payload.kind is PayloadKind.KEY and adv_rng.random() < adv.config.replay_rate:
            delivered.extend(adv.replay_after_disclosure(frame, payload.body))

    stats = AuthStats()
    position = 0
    all_verdicts = []
    for frame in delivered:
        all_verdicts.extend(receiver.on_frame(frame, position))
        position += 1
    all_verdicts.extend(receiver.finalize())

    for verdict in all_verdicts:
        if verdict.status is VerdictStatus.VALID:
            stats.valid += 1
            if (verdict.icao, verdict.message) in adv.injected:
                stats.forged_accepted += 1
        elif verdict.status is VerdictStatus.INVALID:
            stats.invalid += 1
        elif verdict.status is VerdictStatus.DROPPED_UNSAFE:
            stats.dropped_unsafe += 1
        else:
            stats.expired += 1

    delivered_count = len(delivered)
    return SimResult(
        analytic_p=0.0,
        empirical_p=stats.valid / honest_messages if honest_messages else 0.0,
        trials=delivered_count,
        ci95_halfwidth=0.0,
        auth_stats=stats,
    )
