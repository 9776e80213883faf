"""Command-line harness: seeded campaigns, property suites and complexity sweeps."""

from __future__ import annotations

import argparse
import csv
import json
import sys
import warnings
from typing import Sequence

from .sim.campaign import (
    RBC_NOTE, RunRecord, abbba_exhaustive, complexity_band, max_faults, run_campaign,
)
from .sim.runner import ADVERSARIES, CSV_COLUMNS, INPUT_MODES, PROTOCOLS, ScenarioConfig
from .sim.scheduler import STRATEGIES

# suite -> (default protocol, violation categories it asserts; None = all)
CLI_SUITES: dict[str, tuple[str, tuple[str, ...] | None]] = {
    "validity": ("OciorABA", ("termination", "fairness", "validity")),
    "consistency": ("OciorABA", ("termination", "fairness", "consistency", "apva consistency")),
    "apva-def1": ("APVA", None),
    "abbba-lemma13": ("ABBBA", None),
    "complexity": ("OciorABA", None),
}

_ALIASES = {
    "ocioraba": "OciorABA",
    "ocioraba*": "OciorABAStar",
    "ociorabastar": "OciorABAStar",
    "apva": "APVA",
    "rbc": "RBC",
    "abba": "ABBA",
    "abbba": "ABBBA",
}


def parse_protocol(name: str) -> str:
    key = "".join(name.split()).replace("-", "").replace("_", "").lower()
    if key not in _ALIASES:
        raise argparse.ArgumentTypeError(f"unknown protocol {name!r}; choose from {PROTOCOLS}")
    return _ALIASES[key]


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in str(text).split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _choice_list(choices: Sequence[str]):
    def parse(text: str) -> list[str]:
        vals = [x.strip().lower() for x in str(text).split(",") if x.strip()]
        if vals == ["all"]:
            return list(choices)
        bad = [v for v in vals if v not in choices]
        if bad:
            raise argparse.ArgumentTypeError(f"invalid choice(s) {bad}; choose from {list(choices)}")
        return vals
    return parse


def read_config(path: str) -> dict[str, str]:
    """Flat ``key = value`` file; ``#`` starts a comment; keys use flag names."""
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key.replace("-", "_")] = value
    return out


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key=value file mirroring the flags")
    p.add_argument("--n", type=_int_list, default=[4], help="node counts, e.g. 4,7,10")
    p.add_argument("--t", type=int, help="fault bound (default floor((n-1)/3))")
    p.add_argument("--ell", type=int, default=64, help="input length in bits (multiple of 8)")
    p.add_argument("--seeds", type=int, default=1, help="seeded runs per cell")
    p.add_argument("--seed-base", type=int, default=0)
    p.add_argument("--workers", type=int, default=1, help="worker processes")
    p.add_argument("--allow-subresilient", action="store_true", help="permit n < 3t+1")
    p.add_argument("--csv", help="write CSV rows here instead of stdout")
    p.add_argument("--json-summary", help="write aggregate means as JSON")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ocior", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a seeded campaign and check properties")
    _add_common(run)
    run.add_argument("--protocol", type=parse_protocol, help=f"one of {PROTOCOLS}")
    run.add_argument("--input", type=_choice_list(INPUT_MODES), default=["unanimous"])
    run.add_argument("--adversary", type=_choice_list(ADVERSARIES), default=["none"])
    run.add_argument("--scheduler", type=_choice_list(STRATEGIES), default=["random"])
    run.add_argument("--suite", choices=sorted(CLI_SUITES))
    run.add_argument("--max-steps", type=int)
    run.add_argument("--quiet", action="store_true", help="no per-violation lines on stderr")

    cx = sub.add_parser("complexity", help="per-n communication and election means")
    _add_common(cx)
    cx.set_defaults(n=[4, 7, 10, 13, 16], ell=1024, seeds=50)
    parser.subcommands = {"run": run, "complexity": cx}
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: Sequence[str]) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if not args.config:
        return args
    try:
        values = read_config(args.config)
    except (OSError, ValueError) as exc:
        parser.error(str(exc))
    sub = parser.subcommands[args.command]
    known = {a.dest: a for a in sub._actions}  # noqa: SLF001
    defaults = {}
    for key, raw in values.items():
        action = known.get(key)
        if action is None:
            parser.error(f"unknown config key {key!r}")
        if action.const is True and action.nargs == 0:
            defaults[key] = raw.lower() in ("1", "true", "yes", "on")
        elif action.type is not None:
            try:
                defaults[key] = action.type(raw)
            except (argparse.ArgumentTypeError, ValueError) as exc:
                parser.error(f"config key {key}: {exc}")
        else:
            defaults[key] = raw
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def _configs(args, protocol: str) -> list[ScenarioConfig]:
    configs = []
    for n in args.n:
        t = args.t if args.t is not None else max_faults(n)
        for mode in args.input:
            for adv in args.adversary:
                for sch in args.scheduler:
                    for s in range(args.seeds):
                        configs.append(ScenarioConfig(
                            n=n, t=t, protocol=protocol, input_mode=mode, ell=args.ell,
                            adversary=adv, scheduler=sch, seed=args.seed_base + s,
                            max_steps=args.max_steps, allow_subresilient=args.allow_subresilient,
                        ))
    return configs


def _validate(parser, args, configs: list[ScenarioConfig]) -> None:
    if args.seeds < 1:
        parser.error("--seeds must be at least 1")
    for cfg in configs:
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                cfg.validate()
        except ValueError as exc:
            parser.error(str(exc))


def _write_csv(rows: list[dict], path: str | None, columns: Sequence[str]) -> None:
    fh = open(path, "w", newline="") if path else sys.stdout
    try:
        writer = csv.DictWriter(fh, fieldnames=list(columns), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    finally:
        if path:
            fh.close()


def _keep(violation: str, categories: tuple[str, ...] | None) -> bool:
    return categories is None or any(violation.startswith(c + ":") for c in categories)


def cmd_run(parser, args) -> int:
    protocol = args.protocol
    categories = None
    if args.suite:
        default, categories = CLI_SUITES[args.suite]
        protocol = protocol or default
    protocol = protocol or "OciorABA"
    if args.suite == "abbba-lemma13" and protocol != "ABBBA":
        parser.error("--suite abbba-lemma13 runs the ABBBA protocol")
    if args.suite == "apva-def1" and protocol not in ("APVA", "OciorABA"):
        parser.error("--suite apva-def1 needs --protocol APVA or OciorABA")
    configs = _configs(args, protocol)
    _validate(parser, args, configs)

    extra: list[str] = []
    if args.suite == "abbba-lemma13" and args.t in (None, 1) and 4 in args.n:
        ex = abbba_exhaustive(4, 1)
        print(f"exhaustive schedule search: {ex.interleavings} interleavings, "
              f"{len(ex.violations)} violations", file=sys.stderr)
        extra += ex.violations

    report = run_campaign(configs, workers=args.workers)
    records = sorted(report.records, key=lambda r: (r.row["n"], r.row["seed"]))
    kept = [(r, v) for r in records for v in r.violations if _keep(v, categories)]
    _write_csv([r.row for r in records], args.csv, CSV_COLUMNS)

    liveness = sum(1 for r in records if not r.completed)
    if not args.quiet:
        for rec, v in kept[:50]:
            row = rec.row
            print(f"VIOLATION n={row['n']} seed={row['seed']} adversary={row['adversary']} "
                  f"scheduler={row['scheduler']}: {v}", file=sys.stderr)
        for v in extra[:50]:
            print(f"VIOLATION {v}", file=sys.stderr)
    total = len(kept) + len(extra)
    print(f"{len(records)} runs, {total} violations, {liveness} runs without termination",
          file=sys.stderr)
    if args.json_summary:
        summary = report.summary()
        summary["violations"] = total
        summary["exhaustive_violations"] = len(extra)
        with open(args.json_summary, "w") as fh:
            json.dump(summary, fh, indent=2, sort_keys=True)
    return 0 if total == 0 else 1


COMPLEXITY_COLUMNS = (
    "n", "t", "runs", "mean_total_bits", "mean_bits_apva", "mean_bits_rbc",
    "mean_elections", "bits_apva_per_n3",
)


def complexity_rows(records: list[RunRecord]) -> list[dict]:
    by_n: dict[int, list[RunRecord]] = {}
    for r in records:
        by_n.setdefault(r.row["n"], []).append(r)
    rows = []
    for n, recs in sorted(by_n.items()):
        k = len(recs)
        mean = lambda key: sum(r.row[key] for r in recs) / k  # noqa: E731
        rows.append({
            "n": n, "t": recs[0].row["t"], "runs": k,
            "mean_total_bits": mean("total_bits"), "mean_bits_apva": mean("bits_apva"),
            "mean_bits_rbc": mean("bits_rbc"), "mean_elections": mean("elections"),
            "bits_apva_per_n3": mean("bits_apva") / n ** 3,
        })
    return rows


def cmd_complexity(parser, args) -> int:
    if len(set(args.n)) < 3:
        parser.error("complexity needs at least 3 values of n")
    args.input, args.adversary, args.scheduler, args.max_steps = ["random"], ["none"], ["random"], None
    configs = _configs(args, "OciorABA")
    _validate(parser, args, configs)
    report = run_campaign(configs, workers=args.workers)
    rows = complexity_rows(report.records)
    _write_csv(rows, args.csv, COMPLEXITY_COLUMNS)
    band = complexity_band([{"apva_per_n3": r["bits_apva_per_n3"]} for r in rows])
    print(f"bits_apva/n^3 spread across the sweep: {band:.3f}x", file=sys.stderr)
    print(RBC_NOTE, file=sys.stderr)
    if args.json_summary:
        with open(args.json_summary, "w") as fh:
            json.dump({"rows": rows, "apva_band": band, "note": RBC_NOTE,
                       "failures": report.failures}, fh, indent=2)
    return 0 if report.failures == 0 else 1


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = _apply_config(parser, sys.argv[1:] if argv is None else argv)
    if args.command == "run":
        return cmd_run(parser, args)
    return cmd_complexity(parser, args)


if __name__ == "__main__":
    sys.exit(main())
