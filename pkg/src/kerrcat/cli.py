"""Command-line front end.

    kerrcat protocol1 --alpha 0+100i --phi 0.02 --outcome H -o out.json
    kerrcat protocol2 --alpha 0+100i --phi 0.02 --pattern one -o out.json
    kerrcat sweep --alpha 0+100i --phi 0.02 --epsilon 0:0.002:5 -o sweep.csv
    kerrcat wigner --cat-gamma 2 --parity - -o grid.csv

Exit codes: 0 success, 2 usage error, 3 post-selection with probability zero.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import analysis
from .css import ModeLayout, PureState, ZeroNormError, global_phase_distance, state_from_dict
from .elements import BOTH_DETECTORS, ONE_DETECTOR
from .protocols import CatSpec, ProtocolResult, build_cat, run_protocol1, run_protocol2, sample_protocol1

EXIT_USAGE = 2
EXIT_IMPOSSIBLE = 3


def parse_complex(token: str) -> complex:
    """Parse ``a+bi``, ``a`` or ``bi`` (no spaces)."""
    bad = argparse.ArgumentTypeError(f"invalid complex literal {token!r} (expected a+bi)")
    if not token or any(ch in token for ch in " ()jJ"):
        raise bad
    try:
        z = complex(token[:-1] + "j" if token.endswith("i") else token)
    except ValueError:
        raise bad from None
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise bad
    return z


def parse_float(token: str) -> float:
    try:
        return float(token)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid number {token!r}") from None


def _range(conv):
    def parse(token: str) -> list:
        parts = token.split(":")
        if len(parts) == 1:
            return [conv(parts[0])]
        if len(parts) != 3:
            raise argparse.ArgumentTypeError(f"invalid range {token!r} (expected start:stop:count)")
        start, stop = conv(parts[0]), conv(parts[1])
        try:
            count = int(parts[2])
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid count in range {token!r}") from None
        if count < 1:
            raise argparse.ArgumentTypeError(f"empty range {token!r}")
        if count == 1:
            return [start]
        return [start + (stop - start) * k / (count - 1) for k in range(count)]

    return parse


def _interval(token: str) -> tuple[float, float]:
    parts = token.split(":")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"invalid interval {token!r} (expected lo:hi)")
    lo, hi = parse_float(parts[0]), parse_float(parts[1])
    if lo > hi:
        raise argparse.ArgumentTypeError(f"empty interval {token!r}")
    return lo, hi


def _positive_int(token: str) -> int:
    try:
        v = int(token)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid count {token!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"count must be >= 1, got {token!r}")
    return v


PATTERN_ALIASES = {"one": ONE_DETECTOR, ONE_DETECTOR: ONE_DETECTOR, "both": BOTH_DETECTORS, BOTH_DETECTORS: BOTH_DETECTORS}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kerrcat", description="Cat-state generation with weak cross-Kerr coupling")
    sub = parser.add_subparsers(dest="command", required=True)

    p1 = sub.add_parser("protocol1", help="single-photon scheme")
    p1.add_argument("--alpha", type=parse_complex, required=True, help="amplitude in each arm, a+bi")
    p1.add_argument("--phi", type=parse_float, required=True, help="cross-Kerr phase")
    p1.add_argument("--outcome", choices=("H", "V"), help="detected polarization (default H, or sampled with --seed)")
    p1.add_argument("--seed", type=int, help="sample the outcome with this seed instead of fixing it")
    p1.add_argument("--out", "-o", type=Path)
    p1.add_argument("--format", choices=("json",), default="json")

    p2 = sub.add_parser("protocol2", help="twin-photon scheme")
    p2.add_argument("--alpha", type=parse_complex, required=True)
    p2.add_argument("--phi", type=parse_float, required=True)
    p2.add_argument("--pattern", choices=sorted(PATTERN_ALIASES), required=True)
    p2.add_argument("--out", "-o", type=Path)
    p2.add_argument("--format", choices=("json",), default="json")

    sw = sub.add_parser("sweep", help="grid over alpha, phi, epsilon")
    sw.add_argument("--alpha", type=_range(parse_complex), required=True, help="value or start:stop:count")
    sw.add_argument("--phi", type=_range(parse_float), required=True)
    sw.add_argument("--epsilon", type=_range(parse_float), default=[0.0])
    sw.add_argument("--out", "-o", type=Path)
    sw.add_argument("--format", choices=("csv", "json"), default="csv")

    wg = sub.add_parser("wigner", help="Wigner function grid of a single-mode state")
    src = wg.add_mutually_exclusive_group(required=True)
    src.add_argument("--cat-gamma", type=parse_complex)
    src.add_argument("--state", type=Path, help="protocol output or state JSON document")
    src.add_argument("--vacuum", action="store_true")
    wg.add_argument("--parity", choices=("+", "-", "even", "odd"), default="+")
    wg.add_argument("--x-range", type=_interval, default=(-4.0, 4.0))
    wg.add_argument("--p-range", type=_interval, default=(-4.0, 4.0))
    wg.add_argument("--nx", type=_positive_int, default=81)
    wg.add_argument("--np", dest="np_", type=_positive_int, default=81)
    wg.add_argument("--out", "-o", type=Path)
    wg.add_argument("--format", choices=("csv", "json"), default="csv")
    return parser


def _write(path: Path | None, text: str) -> None:
    if path is not None:
        path.write_text(text)


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=1) + "\n"


def _w0(state) -> float:
    return analysis.wigner_point(state, state.layout.field_modes[0], 0)


def cmd_protocol1(args) -> int:
    if args.outcome is None and args.seed is not None:
        res = sample_protocol1(args.alpha, args.phi, args.seed)
    else:
        res = run_protocol1(args.alpha, args.phi, args.outcome or "H")
    _write(args.out, _dump_json(res.to_dict()))
    print(f"outcome={res.outcome} outcome_prob={res.outcome_prob:.17g} "
          f"gamma_phi={analysis.format_complex(res.cat_amplitude_approx)} w0={_w0(res.cat_o2):.17g}")
    return 0


def cmd_protocol2(args) -> int:
    pattern = PATTERN_ALIASES[args.pattern]
    res = run_protocol2(args.alpha, args.phi, pattern)
    _write(args.out, _dump_json(res.to_dict()))
    twin = "H" if pattern == ONE_DETECTOR else "V"
    ref = run_protocol1(args.alpha, args.phi, twin)
    key = "eq5" if twin == "H" else "eq6"
    dist = global_phase_distance(res.checkpoints[key], ref.checkpoints[key])
    print(f"pattern={pattern} outcome_prob={res.outcome_prob:.17g} "
          f"gamma_phi={analysis.format_complex(res.cat_amplitude_approx)} w0={_w0(res.cat_o2):.17g} "
          f"protocol1_{twin}_distance={dist:.3g}")
    return 0


def cmd_sweep(args) -> int:
    records = analysis.sweep(args.alpha, args.phi, args.epsilon)
    if args.format == "csv":
        text = analysis.sweep_to_csv(records)
    else:
        text = _dump_json(analysis.sweep_to_json(records))
    if args.out is None:
        sys.stdout.write(text)
    else:
        _write(args.out, text)
        print(f"rows={len(records)}")
    return 0


def _load_state(path: Path):
    doc = json.loads(path.read_text())
    if "cat_o2" in doc:
        return ProtocolResult.from_dict(doc).cat_o2
    return state_from_dict(doc)


def cmd_wigner(args) -> int:
    if args.vacuum:
        state = PureState.coherent(ModeLayout(("o2",)), (0j,))
    elif args.cat_gamma is not None:
        state = build_cat(CatSpec(args.cat_gamma, args.parity))
    else:
        state = _load_state(args.state)
    mode = state.layout.field_modes[0]
    grid = analysis.wigner_grid(state, mode, args.x_range, args.p_range, args.nx, args.np_)
    if args.format == "csv":
        text = grid.to_csv()
    else:
        text = _dump_json({"x": grid.x.tolist(), "p": grid.p.tolist(), "w": grid.values.tolist()})
    _write(args.out, text)
    print(f"w0={analysis.wigner_point(state, mode, 0):.17g} integral={grid.integral():.17g}")
    return 0


COMMANDS = {"protocol1": cmd_protocol1, "protocol2": cmd_protocol2, "sweep": cmd_sweep, "wigner": cmd_wigner}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except ZeroNormError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IMPOSSIBLE
    except (ValueError, OSError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
