"""Command-line entry point.

Two subcommands:

    fracheat study --problem example1 --s 0.4,0.8 --out study.csv ...
    fracheat consistency --profile gaussian --s 0.3,0.6 --h 0.4,0.2,0.1 ...

Every flag can also come from a `key = value` config file given with
--config; explicit flags override the file.  Exit code is 0 on success
and 1 if any study cell aborted.
"""

from __future__ import annotations

import argparse
import sys

from .study import (
    DESK_SCALE,
    PAPER_SCALE,
    StudyConfig,
    run_consistency_study,
    run_study,
)


def _parse_floats(text):
    return tuple(float(tok) for tok in text.split(",") if tok.strip())


def _parse_pair(text):
    vals = _parse_floats(text)
    if len(vals) != 2:
        raise argparse.ArgumentTypeError(f"expected two comma-separated reals, got {text!r}")
    return vals


def _load_config_file(path):
    """Read `key = value` lines; '#' starts a comment, blank lines skipped."""
    out = {}
    with open(path) as fh:
        for ln, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{ln}: expected key = value, got {raw.rstrip()!r}")
            key, val = (part.strip() for part in line.split("=", 1))
            out[key.replace("-", "_")] = val
    return out


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="fracheat",
        description="Convergence studies for the discrete fractional heat equation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    st = sub.add_parser("study", help="h-sweep convergence study of a manufactured example")
    st.add_argument("--config", help="key = value config file (flags override it)")
    st.add_argument("--problem", choices=("example1", "example2"))
    st.add_argument("--s", type=_parse_floats, dest="s_values", metavar="LIST")
    st.add_argument("--alpha", type=float)
    st.add_argument("--h", type=_parse_floats, dest="h_values", metavar="LIST")
    st.add_argument("--dt", type=float)
    st.add_argument("--domain", type=_parse_pair, metavar="A,B")
    st.add_argument("--window", type=_parse_pair, metavar="C,D")
    st.add_argument("--T", type=float, dest="t_horizon")
    st.add_argument("--stepper", choices=("backward_euler", "l1_caputo", "mild_reference"))
    st.add_argument("--out", help="CSV output path (default: stdout)")
    st.add_argument("--paper-scale", action="store_true",
                    help="use the full-size domain and window")
    st.add_argument("--workers", type=int)
    st.add_argument("--timings", action="store_true",
                    help="record real wall times in the CSV (breaks byte-determinism)")

    co = sub.add_parser("consistency", help="operator-consistency sweep against the oracle")
    co.add_argument("--config", help="key = value config file (flags override it)")
    co.add_argument("--profile", default=None)
    co.add_argument("--s", type=_parse_floats, dest="s_values", metavar="LIST")
    co.add_argument("--h", type=_parse_floats, dest="h_values", metavar="LIST")
    co.add_argument("--domain", type=_parse_pair, metavar="A,B")
    co.add_argument("--window", type=_parse_pair, metavar="C,D")
    co.add_argument("--tol", type=float, help="oracle tolerance")
    co.add_argument("--out", help="CSV output path (default: stdout)")
    return parser


_CONFIG_PARSERS = {
    "problem": str, "s_values": _parse_floats, "alpha": float,
    "h_values": _parse_floats, "dt": float, "domain": _parse_pair,
    "window": _parse_pair, "t_horizon": float, "stepper": str, "out": str,
    "workers": int, "paper_scale": lambda v: v.lower() in ("1", "true", "yes"),
    "timings": lambda v: v.lower() in ("1", "true", "yes"),
    "profile": str, "tol": float, "s": _parse_floats, "h": _parse_floats,
    "T": float,
}
_CONFIG_ALIASES = {"s": "s_values", "h": "h_values", "T": "t_horizon"}


def _merge_config(args):
    """Overlay config-file values under explicit flags; returns a dict."""
    merged = {}
    if getattr(args, "config", None):
        for key, raw in _load_config_file(args.config).items():
            if key not in _CONFIG_PARSERS:
                raise ValueError(f"unknown config key {key!r}")
            merged[_CONFIG_ALIASES.get(key, key)] = _CONFIG_PARSERS[key](raw)
    for key, val in vars(args).items():
        if key in ("command", "config"):
            continue
        if val is not None and val is not False:
            merged[key] = val
    return merged


def _report(result, out):
    for s, h, reason in result.failures:
        print(f"cell (s={s}, h={h}) aborted: {reason}", file=sys.stderr)
    for rate in result.rates:
        print(
            f"s={rate.s}: fitted order {rate.order:.4f} "
            f"(residual {rate.residual:.2e}, {rate.n_used} points)",
            file=sys.stderr,
        )
    if out is None and result.records:
        from .study import emit_csv

        emit_csv(result, sys.stdout)
    return 1 if result.failures else 0


def main(argv=None):
    args = _build_parser().parse_args(argv)
    merged = _merge_config(args)

    if args.command == "study":
        if merged.pop("paper_scale", False):
            merged.setdefault("domain", PAPER_SCALE["domain"])
            merged.setdefault("window", PAPER_SCALE["window"])
        merged.pop("timings", None)
        include_timings = bool(getattr(args, "timings", False))
        cfg = StudyConfig(include_timings=include_timings, **merged)
        result = run_study(cfg)
        return _report(result, cfg.out)

    # consistency
    kwargs = {}
    for key in ("s_values", "h_values", "profile", "window", "domain", "tol", "out"):
        if key in merged:
            kwargs[key] = merged[key]
    if "s_values" not in kwargs or "h_values" not in kwargs:
        print("consistency requires --s and --h", file=sys.stderr)
        return 2
    result = run_consistency_study(**kwargs)
    return _report(result, kwargs.get("out"))


if __name__ == "__main__":
    sys.exit(main())
