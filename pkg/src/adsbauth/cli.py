"""Command-line surface: keygen, sign, verify, collide, simulate, frame.

All commands are batch pipelines: they read configuration files and
stdin, write stdout, and never prompt.  Exit codes: 0 success, 1 usage
error, 2 integrity or verification failure, 3 I/O error.  See FORMATS.md
for the file and stream formats with worked examples.
"""

from __future__ import annotations

import argparse
import json
import secrets
import sys

from . import channel_sim, crypto, frame_codec
from .errors import (
    CaptureFormatError,
    ChainExhaustedError,
    FrameIntegrityError,
    ProtocolError,
)
from .receiver import Receiver, ReceiverConfig
from .sender import Sender, SenderConfig

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INTEGRITY = 2
EXIT_IO = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); the contract says 1
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="adsbauth", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("keygen", help="generate a key chain file")
    p.add_argument("--seed", help="64 hex chars; random when omitted")
    p.add_argument("--length", type=int, required=True, help="keys beyond the anchor")
    p.add_argument("--icao", default="a00001", help="transmitter address, 6 hex chars")
    p.add_argument("--out", default="-", help="chain file path, - for stdout")

    p = sub.add_parser("sign", help="sign a JSON-lines message stream into a capture")
    p.add_argument("--chain", action="append", required=True, help="chain file (repeatable)")
    p.add_argument("--d", type=int, default=10, dest="disclosure_delay")
    p.add_argument("--interval", type=int, default=10)
    p.add_argument("--duplicates", type=int, default=2)
    p.add_argument(
        "--flush-keys",
        action="store_true",
        help="append the remaining key releases so the capture verifies standalone",
    )

    p = sub.add_parser("verify", help="verify a hex capture against anchor keys")
    p.add_argument("--anchors", required=True, help="anchors JSON file")
    p.add_argument("--d", type=int, default=10, dest="disclosure_delay")
    p.add_argument("--interval", type=int, default=10)
    p.add_argument("--max-correctable", type=int, default=1)
    p.add_argument("--fail-on-unverifiable", action="store_true")

    p = sub.add_parser("collide", help="collision probability sweep to CSV")
    p.add_argument("--config", required=True, help="scenario JSON file")
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("simulate", help="end-to-end protocol run with loss and adversary")
    p.add_argument("--aircraft", type=int, default=2)
    p.add_argument("--messages", type=int, default=50, help="messages per aircraft")
    p.add_argument("--loss", type=float, default=0.0)
    p.add_argument("--forge-rate", type=float, default=0.0)
    p.add_argument("--modify-rate", type=float, default=0.0)
    p.add_argument("--replay-rate", type=float, default=0.0)
    p.add_argument("--d", type=int, default=10, dest="disclosure_delay")
    p.add_argument("--interval", type=int, default=10)
    p.add_argument("--duplicates", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("frame", help="encode or decode a single frame")
    frame_sub = p.add_subparsers(dest="frame_command", required=True)
    enc = frame_sub.add_parser("encode")
    enc.add_argument("--df", type=int, default=frame_codec.DF_EXTENDED_SQUITTER)
    enc.add_argument("--capability", type=int, default=5)
    enc.add_argument("--icao", required=True, help="6 hex chars")
    enc.add_argument("--me", required=True, help="14 hex chars (56 bits)")
    dec = frame_sub.add_parser("decode")
    dec.add_argument("hexframe", help="28 hex chars, optional ;timestamp")
    dec.add_argument("--max-correctable", type=int, default=1)

    return parser


def _load_json(path: str):
    with open(path, "r", encoding="utf-8") as handle:
        return json.load(handle)


def _cmd_keygen(args) -> int:
    if args.length < 1:
        raise UsageError("--length must be >= 1")
    seed = crypto.seed_from_hex(args.seed) if args.seed else secrets.token_bytes(32)
    chain = crypto.generate_chain(seed, args.length)
    doc = {
        "icao": args.icao.lower(),
        "seed": crypto.seed_to_hex(seed),
        "length": args.length,
        "anchor": crypto.key_to_hex(chain.anchor.bits),
        "anchor_index": 0,
    }
    text = json.dumps(doc, indent=2) + "\n"
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(text)
    return EXIT_OK


def _sender_from_chain_file(path: str, args) -> Sender:
    doc = _load_json(path)
    chain = crypto.generate_chain(crypto.seed_from_hex(doc["seed"]), int(doc["length"]))
    if crypto.key_to_hex(chain.anchor.bits) != doc["anchor"]:
        raise ProtocolError(f"chain file {path} anchor does not match its seed")
    config = SenderConfig(
        chain=chain,
        icao=int(doc["icao"], 16),
        disclosure_delay=args.disclosure_delay,
        interval_len=args.interval,
        duplicates=args.duplicates,
    )
    return Sender(config)


def _cmd_sign(args) -> int:
    senders: dict[int, Sender] = {}
    for path in args.chain:
        sender = _sender_from_chain_file(path, args)
        senders[sender.config.icao] = sender

    exhausted = False
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        record = json.loads(line)
        icao = int(record["icao"], 16)
        message = int(record["message_hex"], 16)
        sender = senders.get(icao)
        if sender is None:
            print(f"no chain for icao {icao:06x}", file=sys.stderr)
            return EXIT_USAGE
        try:
            frames = sender.emit_message(message)
        except ChainExhaustedError as exc:
            print(f"chain exhausted: {exc}", file=sys.stderr)
            exhausted = True
            break
        for frame in frames:
            print(frame_codec.frame_to_hexline(frame))
    if args.flush_keys and not exhausted:
        for icao in sorted(senders):
            for frame in senders[icao].finish_session():
                print(frame_codec.frame_to_hexline(frame))
    return EXIT_INTEGRITY if exhausted else EXIT_OK


def _cmd_verify(args) -> int:
    anchors = _load_json(args.anchors)
    receiver = Receiver(
        ReceiverConfig(
            disclosure_delay=args.disclosure_delay, interval_len=args.interval
        )
    )
    for entry in anchors:
        receiver.add_anchor(
            int(entry["icao"], 16),
            crypto.ChainKey(
                crypto.key_from_hex(entry["anchor"]), int(entry["anchor_index"])
            ),
        )

    position = 0
    verdicts = []
    for line in sys.stdin:
        if not line.strip():
            continue
        try:
            raw, _ = frame_codec.parse_hexline(line)
            frame, _corrected = frame_codec.decode_frame(raw, args.max_correctable)
        except (CaptureFormatError, FrameIntegrityError):
            receiver.summary.malformed += 1
            continue
        verdicts.extend(receiver.on_frame(frame, position))
        position += 1
    verdicts.extend(receiver.finalize())

    for verdict in verdicts:
        print(
            json.dumps(
                {
                    "icao": f"{verdict.icao:06x}",
                    "seq": verdict.seq,
                    "status": verdict.status.value,
                    "interval": verdict.interval,
                }
            )
        )
    summary = receiver.summary
    print(json.dumps({"summary": summary.as_dict()}))

    if summary.invalid or summary.dropped_unsafe:
        return EXIT_INTEGRITY
    if args.fail_on_unverifiable and summary.unverifiable:
        return EXIT_INTEGRITY
    return EXIT_OK


def _scenario_from_dict(doc: dict) -> channel_sim.Scenario:
    classes = tuple(
        channel_sim.TrafficClass(
            name=cls["name"],
            packet_bits=int(cls["packet_bits"]),
            rate_per_aircraft=float(cls["rate_per_aircraft"]),
            preamble_us=float(cls.get("preamble_us", channel_sim.PREAMBLE_US)),
        )
        for cls in doc["classes"]
    )
    return channel_sim.Scenario(
        name=doc["name"],
        classes=classes,
        rate_multiplier=float(doc.get("rate_multiplier", 1.0)),
        include_preamble=bool(doc.get("include_preamble", True)),
    )


def _cmd_collide(args) -> int:
    config = _load_json(args.config)
    try:
        n_range = [int(n) for n in config["n_range"]]
        scenarios = [_scenario_from_dict(s) for s in config["scenarios"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"bad scenario config: {exc}") from exc
    sys.stdout.write(
        channel_sim.sweep_fig4(n_range, scenarios, trials=args.trials, rng_seed=args.seed)
    )
    return EXIT_OK


def _cmd_simulate(args) -> int:
    adversary = channel_sim.AdversaryConfig(
        forge_rate=args.forge_rate,
        modify_rate=args.modify_rate,
        replay_rate=args.replay_rate,
    )
    result = channel_sim.run_end_to_end(
        n_aircraft=args.aircraft,
        per_copy_loss=args.loss,
        adversary=adversary,
        duration_packets=args.messages * 2 * args.aircraft,
        rng_seed=args.seed,
        disclosure_delay=args.disclosure_delay,
        interval_len=args.interval,
        duplicates=args.duplicates,
    )
    print(
        json.dumps(
            {
                "frames_delivered": result.trials,
                "honest_valid_fraction": result.empirical_p,
                "auth_stats": result.auth_stats.as_dict(),
            }
        )
    )
    return EXIT_OK if result.auth_stats.forged_accepted == 0 else EXIT_INTEGRITY


def _cmd_frame(args) -> int:
    if args.frame_command == "encode":
        me = int(args.me, 16)
        frame = frame_codec.Frame.from_fields(
            args.df, args.capability, int(args.icao, 16), me
        )
        print(frame_codec.frame_to_hexline(frame))
        return EXIT_OK
    raw, timestamp = frame_codec.parse_hexline(args.hexframe)
    try:
        frame, corrected = frame_codec.decode_frame(raw, args.max_correctable)
    except FrameIntegrityError as exc:
        print(f"uncorrectable: {exc}", file=sys.stderr)
        return EXIT_INTEGRITY
    print(
        json.dumps(
            {
                "df": frame.df,
                "capability": frame.capability,
                "icao": f"{frame.icao:06x}",
                "me": f"{frame.me:014x}",
                "parity": f"{frame.parity:06x}",
                "corrected_bits": corrected,
                "timestamp_us": timestamp,
            }
        )
    )
    return EXIT_OK


_COMMANDS = {
    "keygen": _cmd_keygen,
    "sign": _cmd_sign,
    "verify": _cmd_verify,
    "collide": _cmd_collide,
    "simulate": _cmd_simulate,
    "frame": _cmd_frame,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ProtocolError, json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTEGRITY


if __name__ == "__main__":
    sys.exit(main())
