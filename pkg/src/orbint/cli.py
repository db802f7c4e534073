"""Command-line harness: verification campaigns, germ checks, transfer demos.

Commands
--------
verify-fl    run the matching campaigns described by a config file,
             write JSON and CSV reports, exit 0 iff every row is "equal"
germ         check germ membership of a cell function given as JSON
kloosterman  print one twisted Kloosterman integral, exact and approximate
transfer     build matching test data for a step-function target and
             verify the round trip on a probe grid

Exit codes: 0 success, 2 an exact identity failed, 3 resource/parameter
guard (enumeration budget, or an even prime for family B), 4 input files
that do not parse or violate a precondition.

Reports are deterministic: a given config produces byte-identical JSON
(timings appear only in the CSV, never in the JSON).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from fractions import Fraction

from .cells import CellFunction
from .errors import (
    BudgetExceeded,
    Mismatch,
    OddPrimeRequired,
    OrbintError,
    ParseError,
)
from .measure import DEFAULT_BUDGET
from .orbital import (
    CSV_HEADER,
    cyc_string,
    j_unit_closed,
    model_spec,
    verify_fl,
)
from .transfer import (
    build_fprime_from_step,
    build_phi_from_step,
    check_germ_membership,
    verify_fprime_against_step,
    verify_phi_against_step,
)

EXIT_OK = 0
EXIT_MISMATCH = 2
EXIT_BUDGET = 3
EXIT_PARSE = 4

CONFIG_SCHEMA = "orbint-config/1"
REPORT_SCHEMA = "orbint-report/1"


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


def load_config(path: str) -> dict:
    """Read and validate a campaign configuration file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read config {path}: {exc}") from exc
    return normalize_config(doc)


def normalize_config(doc: dict) -> dict:
    if not isinstance(doc, dict) or doc.get("schema") != CONFIG_SCHEMA:
        raise ParseError(f"config must declare schema {CONFIG_SCHEMA!r}")
    out = {
        "schema": CONFIG_SCHEMA,
        "models": list(doc.get("models", [])),
        "primes": list(doc.get("primes", [])),
        "r_max": int(doc.get("r_max", 1)),
        "units": doc.get("units", "all"),
        "budget": int(doc.get("budget", DEFAULT_BUDGET)),
        "seed": int(doc.get("seed", 0)),
    }
    if not all(isinstance(m, int) and 1 <= m <= 6 for m in out["models"]):
        raise ParseError("models must be integers in 1..6")
    if not all(isinstance(p, int) and p >= 2 for p in out["primes"]):
        raise ParseError("primes must be integers >= 2")
    units = out["units"]
    if units != "all":
        if (
            not isinstance(units, list)
            or len(units) != 2
            or units[0] != "first"
            or not isinstance(units[1], int)
            or units[1] < 1
        ):
            raise ParseError("units must be \"all\" or [\"first\", k]")
        out["units"] = ("first", units[1])
    return out


def _load_cellfn(path: str) -> CellFunction:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    try:
        return CellFunction.from_json(text)
    except (json.JSONDecodeError, ParseError, KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{path} is not a cell-function document: {exc}") from exc


# ---------------------------------------------------------------------------
# verify-fl
# ---------------------------------------------------------------------------


def cmd_verify_fl(args) -> int:
    try:
        config = load_config(args.config)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    if args.budget is not None:
        config["budget"] = args.budget
    if args.seed is not None:
        config["seed"] = args.seed

    reports = []
    try:
        for model in config["models"]:
            for p in config["primes"]:
                reports.append(
                    verify_fl(
                        model,
                        p,
                        r_max=config["r_max"],
                        units=config["units"],
                        budget=config["budget"],
                    )
                )
    except (BudgetExceeded, OddPrimeRequired) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_BUDGET

    ok = all(rep.ok for rep in reports)
    envelope = {
        "schema": REPORT_SCHEMA,
        "config": {**config, "units": list(config["units"])
                   if config["units"] != "all" else "all"},
        "ok": ok,
        "reports": [rep.to_json_dict() for rep in reports],
    }
    if args.out:
        with open(args.out + ".json", "w", encoding="utf-8") as fh:
            json.dump(envelope, fh, sort_keys=True, indent=1)
            fh.write("\n")
        with open(args.out + ".csv", "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_HEADER)
            for rep in reports:
                for row in rep.rows:
                    writer.writerow(row.to_csv_row())
    else:
        json.dump(envelope, sys.stdout, sort_keys=True, indent=1)
        sys.stdout.write("\n")

    if not ok:
        for rep in reports:
            for row in rep.rows:
                if not row.ok:
                    print(
                        f"UNEQUAL: model {row.model}, p={row.p}, "
                        f"kind={row.kind}, r={row.r}, u={row.u}",
                        file=sys.stderr,
                    )
        return EXIT_MISMATCH
    return EXIT_OK


# ---------------------------------------------------------------------------
# germ
# ---------------------------------------------------------------------------


def cmd_germ(args) -> int:
    try:
        config = load_config(args.config)
        phi = _load_cellfn(args.phi)
        phiprime = _load_cellfn(args.phiprime) if args.phiprime else None
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    if not config["models"] or not config["primes"]:
        print("error: germ needs one model and one prime in the config",
              file=sys.stderr)
        return EXIT_PARSE
    model = config["models"][0]
    spec = model_spec(model)
    if spec.family == "B" and phiprime is None:
        print(f"error: model {model} needs --phiprime", file=sys.stderr)
        return EXIT_PARSE
    try:
        germ, verdict = check_germ_membership(
            model, phi, phiprime, budget=config["budget"]
        )
    except Mismatch as exc:
        print(f"mismatch: {exc}", file=sys.stderr)
        print(f"  left  = {cyc_string(exc.left)}", file=sys.stderr)
        print(f"  right = {cyc_string(exc.right)}", file=sys.stderr)
        return EXIT_MISMATCH
    except (BudgetExceeded, OddPrimeRequired) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_BUDGET

    doc = {
        "schema": REPORT_SCHEMA,
        "model": model,
        "p": phi.p,
        "verdict": verdict,
        "c_plus": germ.c_plus.describe(),
        "c_minus": germ.c_minus.describe(),
        "m": germ.m,
        "r0": germ.r0,
    }
    json.dump(doc, sys.stdout, sort_keys=True, indent=1)
    sys.stdout.write("\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# kloosterman
# ---------------------------------------------------------------------------


def cmd_kloosterman(args) -> int:
    p, r, unit = args.p, args.r, args.unit
    a = Fraction(unit) * Fraction(p) ** r
    # integral over the unit group = p^-r times the twisted Kloosterman sum
    value = j_unit_closed(p, a) * Fraction(1, p**r)
    info = value.describe()
    print(f"p={p} r={r} unit={unit}")
    print(f"exact: {cyc_string(value)}")
    print(f"coeffs (order p^{info['order_exp']}): {info['coeffs']}")
    print(f"approx: {info['approx'][0]} + {info['approx'][1]} i")
    return EXIT_OK


# ---------------------------------------------------------------------------
# transfer
# ---------------------------------------------------------------------------


def cmd_transfer(args) -> int:
    try:
        target = _load_cellfn(args.target)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE

    try:
        if args.kuznetsov:
            fprime = build_fprime_from_step(target.p, target)
            rows = verify_fprime_against_step(target, fprime)
            built: dict = fprime.to_json_dict()
        else:
            phi = build_phi_from_step(args.model, target, budget=args.budget)
            rows = verify_phi_against_step(args.model, target, phi,
                                           budget=args.budget)
            built = phi.to_json_dict()
    except (ValueError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (BudgetExceeded, OddPrimeRequired) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_BUDGET

    ok = all(row[3] for row in rows)
    doc = {
        "schema": REPORT_SCHEMA,
        "kind": "kuznetsov" if args.kuznetsov else f"model-{args.model}",
        "ok": ok,
        "constructed": built,
        "probes": [
            {
                "a": str(a),
                "want": cyc_string(want),
                "got": cyc_string(got),
                "ok": row_ok,
            }
            for a, want, got, row_ok in rows
        ],
    }
    if args.out:
        with open(args.out + ".json", "w", encoding="utf-8") as fh:
            json.dump(doc, fh, sort_keys=True, indent=1)
            fh.write("\n")
    else:
        json.dump(doc, sys.stdout, sort_keys=True, indent=1)
        sys.stdout.write("\n")
    return EXIT_OK if ok else EXIT_MISMATCH


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="orbint",
        description="exact local orbital-integral verification campaigns",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_fl = sub.add_parser("verify-fl", help="run matching campaigns")
    p_fl.add_argument("--config", required=True, help="campaign config JSON")
    p_fl.add_argument("--out", help="output path prefix (.json/.csv appended)")
    p_fl.add_argument("--budget", type=int, help="override enumeration budget")
    p_fl.add_argument("--seed", type=int, help="override config seed")
    p_fl.set_defaults(fn=cmd_verify_fl)

    p_germ = sub.add_parser("germ", help="check germ membership of a cell function")
    p_germ.add_argument("--config", required=True)
    p_germ.add_argument("--phi", required=True, help="cell function JSON file")
    p_germ.add_argument("--phiprime", help="auxiliary function for family B")
    p_germ.set_defaults(fn=cmd_germ)

    p_kl = sub.add_parser("kloosterman", help="print one Kloosterman integral")
    p_kl.add_argument("p", type=int)
    p_kl.add_argument("r", type=int)
    p_kl.add_argument("unit", type=int)
    p_kl.set_defaults(fn=cmd_kloosterman)

    p_tr = sub.add_parser("transfer", help="build matching data for a step target")
    p_tr.add_argument("--target", required=True, help="step function JSON file")
    p_tr.add_argument("--model", type=int, default=1)
    p_tr.add_argument("--kuznetsov", action="store_true",
                      help="build the SL2-side function instead")
    p_tr.add_argument("--out", help="output path prefix (.json appended)")
    p_tr.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p_tr.set_defaults(fn=cmd_transfer)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except OrbintError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_BUDGET if isinstance(exc, BudgetExceeded) else EXIT_MISMATCH


if __name__ == "__main__":
    sys.exit(main())
