"""Command-line front end: batch validation, invariants, oracles, reports.

Subcommands (all take --config pointing at a JSON orbifold description):

    check       group order and per-element G2 compatibility
    invariants  exact mu_3 / mu_4 (optionally cross-checked via zeta values)
    spectrum    brute-force vs formula eigenspace dimensions per class
    identities  refined-derivative identity suite + Hessian block checks
    zeta        value at 0 of each element's twisted zeta + closed-form mu

Exit codes: 0 success, 1 mathematical mismatch or validation failure,
2 malformed input.  Reports are JSON (or CSV) on stdout and deterministic
for a fixed config and seed up to the wall_time_s field.
"""

import argparse
import csv
import io
import json
import sys
import time
from fractions import Fraction

from .epstein import closed_form_mu, fixed_lattice, value_at_zero
from .fourier import (hessian_blocks, random_fourier, split_S4, verify_appendix,
                      coexterior_d, l2_norm, project_type)
from .invariants import mu_invariants
from .oracle import spectral_reports
from .orbifold import (AffineElement, NonFinite, NonUnimodular, NotG2Compatible,
                       generate, validate_joyce)

TOOL_VERSION = "0.1.0"

_CONFIG_FIELDS = {"name", "generators", "frame", "oracle_radius_sq", "trials", "seed"}
_GENERATOR_FIELDS = {"matrix", "translation"}


class ConfigError(ValueError):
    pass


def parse_config(raw):
    """Validate and normalise a config dict; unknown fields are rejected."""
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(raw) - _CONFIG_FIELDS
    if unknown:
        raise ConfigError(f"unknown config fields: {sorted(unknown)}")
    if "name" not in raw or not isinstance(raw["name"], str):
        raise ConfigError("config needs a string 'name'")
    gens_raw = raw.get("generators", [])
    if not isinstance(gens_raw, list):
        raise ConfigError("'generators' must be a list")
    generators = []
    for k, g in enumerate(gens_raw):
        if not isinstance(g, dict) or set(g) - _GENERATOR_FIELDS:
            raise ConfigError(f"generator {k}: expected keys {sorted(_GENERATOR_FIELDS)}")
        mat = g.get("matrix")
        if not isinstance(mat, list) or len(mat) != 49 \
                or not all(isinstance(x, int) for x in mat):
            raise ConfigError(f"generator {k}: 'matrix' must be 49 row-major integers")
        rows = [mat[i * 7:(i + 1) * 7] for i in range(7)]
        trans_raw = g.get("translation", ["0"] * 7)
        if not isinstance(trans_raw, list) or len(trans_raw) != 7:
            raise ConfigError(f"generator {k}: 'translation' must have 7 entries")
        try:
            trans = [Fraction(str(x)) for x in trans_raw]
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"generator {k}: bad rational in translation: {exc}")
        generators.append((rows, trans))
    frame = raw.get("frame")
    if frame is not None:
        if not isinstance(frame, list) or len(frame) != 7 \
                or any(not isinstance(r, list) or len(r) != 7 for r in frame):
            raise ConfigError("'frame' must be a 7x7 matrix (list of 7 rows)")
        try:
            frame = [[Fraction(str(x)) for x in row] for row in frame]
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"bad rational in frame: {exc}")
    radius = raw.get("oracle_radius_sq", 9)
    try:
        radius = Fraction(str(radius))
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"bad oracle_radius_sq: {exc}")
    if radius < 0:
        raise ConfigError("oracle_radius_sq must be nonnegative")
    trials = raw.get("trials", 100)
    seed = raw.get("seed", 0)
    if not isinstance(trials, int) or trials < 1:
        raise ConfigError("trials must be a positive integer")
    if not isinstance(seed, int):
        raise ConfigError("seed must be an integer")
    return {
        "name": raw["name"],
        "generators": generators,
        "frame": frame,
        "oracle_radius_sq": radius,
        "trials": trials,
        "seed": seed,
    }


def build_orbifold(config):
    gens = [AffineElement(rows, trans) for rows, trans in config["generators"]]
    group = generate(gens)
    return validate_joyce(group, config["frame"])


def _element_dict(e):
    return {
        "matrix": [x for row in e.matrix for x in row],
        "translation": [str(t) for t in e.translation],
    }


def _echo_config(config):
    out = {
        "name": config["name"],
        "generators": [
            {"matrix": [x for row in rows for x in row],
             "translation": [str(t) for t in trans]}
            for rows, trans in config["generators"]
        ],
        "oracle_radius_sq": str(config["oracle_radius_sq"]),
        "trials": config["trials"],
        "seed": config["seed"],
    }
    if config["frame"] is not None:
        out["frame"] = [[str(x) for x in row] for row in config["frame"]]
    return out


# -- commands -----------------------------------------------------------------


def cmd_check(config, args):
    try:
        orbifold = build_orbifold(config)
    except NotG2Compatible as exc:
        return 1, {
            "valid": False,
            "error": {"type": "NotG2Compatible", "element": _element_dict(exc.element)},
        }
    elements = [dict(_element_dict(e), g2_compatible=True) for e in orbifold.group]
    return 0, {"valid": True, "order": len(orbifold.group), "elements": elements}


def cmd_invariants(config, args):
    orbifold = build_orbifold(config)
    pair = mu_invariants(orbifold)
    results = {
        "mu3": str(pair.mu3), "mu3_decimal": float(pair.mu3),
        "mu4": str(pair.mu4), "mu4_decimal": float(pair.mu4),
    }
    code = 0
    if args.crosscheck:
        tol = args.tolerance if args.tolerance is not None else 1e-6
        bridge = closed_form_mu(orbifold)
        within = (abs(bridge.mu3 - float(pair.mu3)) <= tol
                  and abs(bridge.mu4 - float(pair.mu4)) <= tol)
        results["zeta_crosscheck"] = {
            "mu3": bridge.mu3, "mu4": bridge.mu4,
            "tolerance": tol, "within_tolerance": within,
        }
        if not within:
            code = 1
    return code, results


def cmd_spectrum(config, args):
    orbifold = build_orbifold(config)
    radius = args.radius_sq if args.radius_sq is not None else config["oracle_radius_sq"]
    reports = spectral_reports(orbifold, radius)
    rows = [r.to_json_dict() for r in reports]
    mismatches = sum(1 for r in reports if not r.match)
    return (1 if mismatches else 0), {
        "radius_sq": str(radius),
        "reports": rows,
        "mismatches": mismatches,
    }


def cmd_identities(config, args):
    orbifold = build_orbifold(config)
    structure = orbifold.structure
    trials = args.trials if args.trials is not None else config["trials"]
    seed = args.seed if args.seed is not None else config["seed"]
    tol = args.tolerance if args.tolerance is not None else 1e-9
    report = verify_appendix(structure, trials=trials, seed=seed,
                             strict=args.strict_types)

    # property suites for the Hessian block structure, seeded separately
    import numpy as np
    rng = np.random.default_rng(seed + 1)
    split_checks = {"pi27_d_plus": 0.0, "pi7_d_minus": 0.0,
                    "plus_minus_inner": 0.0, "split_reassembles": 0.0}
    hessian_checks = {"dstar_I_d_equals_minus_dstar_d": 0.0}
    for _ in range(max(1, trials // 10)):
        eta = random_fourier(structure, 4, rng, n_modes=3)
        pre = coexterior_d(eta)
        blocks = hessian_blocks("F", pre)
        omega = blocks.blocks["S_plus"] + blocks.blocks["S_minus"]
        if omega.is_zero(1e-14):
            continue
        from .fourier import exterior_d, l2_inner, residual
        plus, minus = split_S4(omega)
        split_checks["pi27_d_plus"] = max(
            split_checks["pi27_d_plus"],
            l2_norm(project_type(exterior_d(plus), 4, 27).to_float()))
        split_checks["pi7_d_minus"] = max(
            split_checks["pi7_d_minus"],
            l2_norm(project_type(exterior_d(minus), 4, 7).to_float()))
        split_checks["plus_minus_inner"] = max(
            split_checks["plus_minus_inner"], abs(l2_inner(plus, minus)))
        split_checks["split_reassembles"] = max(
            split_checks["split_reassembles"], residual(plus + minus, omega))
        two = random_fourier(structure, 2, rng, n_modes=3)
        e_blocks = hessian_blocks("E", two)
        hessian_checks["dstar_I_d_equals_minus_dstar_d"] = max(
            hessian_checks["dstar_I_d_equals_minus_dstar_d"],
            e_blocks.checks["dstar_I_d_equals_minus_dstar_d"])

    failures = sorted(
        [name for name, v in report["identities"].items() if v > tol]
        + [f"split:{k}" for k, v in split_checks.items() if v > tol]
        + [f"hessian:{k}" for k, v in hessian_checks.items() if v > tol])
    return (1 if failures else 0), {
        "seed": seed,
        "trials": trials,
        "tolerance": tol,
        "identities": report["identities"],
        "split_checks": split_checks,
        "hessian_checks": hessian_checks,
        "failures": failures,
    }


def cmd_zeta(config, args):
    orbifold = build_orbifold(config)
    tol = args.tolerance if args.tolerance is not None else 1e-6
    metric = orbifold.structure.metric
    rows = []
    worst = 0.0
    for e in orbifold.group:
        lat = fixed_lattice(e, metric)
        v0 = value_at_zero(lat)
        deviation = abs(v0 + 1.0)
        worst = max(worst, deviation)
        rows.append({
            "element": _element_dict(e),
            "rank": lat.rank,
            "twist": [str(t) for t in lat.twist],
            "value_at_zero": v0,
            "deviation_from_minus_1": deviation,
        })
    pair = mu_invariants(orbifold)
    bridge = closed_form_mu(orbifold)
    bridge_dev = max(abs(bridge.mu3 - float(pair.mu3)), abs(bridge.mu4 - float(pair.mu4)))
    code = 1 if (worst > tol or bridge_dev > tol) else 0
    return code, {
        "tolerance": tol,
        "elements": rows,
        "max_deviation": worst,
        "closed_form_mu": {"mu3": bridge.mu3, "mu4": bridge.mu4},
        "exact_mu": {"mu3": str(pair.mu3), "mu4": str(pair.mu4)},
        "closed_form_deviation": bridge_dev,
    }


COMMANDS = {
    "check": cmd_check,
    "invariants": cmd_invariants,
    "spectrum": cmd_spectrum,
    "identities": cmd_identities,
    "zeta": cmd_zeta,
}


# -- output -------------------------------------------------------------------


def _csv_rows(command, results):
    if command == "check":
        header = ["matrix", "translation", "g2_compatible"]
        rows = [[" ".join(map(str, e["matrix"])), " ".join(e["translation"]),
                 e.get("g2_compatible", False)] for e in results.get("elements", [])]
    elif command == "invariants":
        header = ["invariant", "exact", "decimal"]
        rows = [["mu3", results["mu3"], results["mu3_decimal"]],
                ["mu4", results["mu4"], results["mu4_decimal"]]]
    elif command == "spectrum":
        header = ["norm_sq", "kind", "dim_bruteforce", "dim_formula", "match"]
        rows = [[r["norm_sq"], r["kind"], r["dim_bruteforce"], r["dim_formula"],
                 r["match"]] for r in results["reports"]]
    elif command == "identities":
        header = ["identity", "max_residual"]
        rows = sorted(results["identities"].items())
        rows += sorted((f"split:{k}", v) for k, v in results["split_checks"].items())
        rows += sorted((f"hessian:{k}", v) for k, v in results["hessian_checks"].items())
    elif command == "zeta":
        header = ["rank", "twist", "value_at_zero", "deviation"]
        rows = [[r["rank"], " ".join(r["twist"]), r["value_at_zero"],
                 r["deviation_from_minus_1"]] for r in results["elements"]]
    else:
        raise ValueError(command)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def run(argv=None):
    parser = argparse.ArgumentParser(
        prog="g2mu",
        description="mu-invariants and spectral verification for flat G2 orbifolds")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="path to a JSON orbifold config")
    parser.add_argument("--radius-sq", dest="radius_sq", default=None,
                        help="squared-norm cutoff for the spectrum oracle (rational)")
    parser.add_argument("--trials", type=int, default=None)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--tolerance", type=float, default=None)
    parser.add_argument("--output", choices=["json", "csv"], default="json")
    parser.add_argument("--strict-types", dest="strict_types", action="store_true",
                        help="reject inputs outside a refined operator's domain type")
    parser.add_argument("--crosscheck", action="store_true",
                        help="invariants: also run the zeta-function consistency bridge")
    args = parser.parse_args(argv)

    if args.radius_sq is not None:
        try:
            args.radius_sq = Fraction(str(args.radius_sq))
        except (ValueError, ZeroDivisionError):
            print(json.dumps({"error": {"type": "ConfigError",
                                        "detail": "bad --radius-sq"}}), file=sys.stderr)
            return 2

    try:
        with open(args.config) as fh:
            raw = json.load(fh)
        config = parse_config(raw)
    except (OSError, json.JSONDecodeError, ConfigError) as exc:
        print(json.dumps({"error": {"type": type(exc).__name__, "detail": str(exc)}}),
              file=sys.stderr)
        return 2

    t0 = time.perf_counter()
    try:
        code, results = COMMANDS[args.command](config, args)
    except (NonUnimodular, NonFinite, NotG2Compatible, ValueError, ArithmeticError) as exc:
        report = {
            "tool_version": TOOL_VERSION,
            "command": args.command,
            "config": _echo_config(config),
            "error": {"type": type(exc).__name__, "detail": str(exc)},
            "wall_time_s": round(time.perf_counter() - t0, 6),
        }
        print(json.dumps(report, sort_keys=True))
        return 1

    report = {
        "tool_version": TOOL_VERSION,
        "command": args.command,
        "config": _echo_config(config),
        "results": results,
        "wall_time_s": round(time.perf_counter() - t0, 6),
    }
    if args.output == "csv":
        sys.stdout.write(_csv_rows(args.command, results))
    else:
        print(json.dumps(report, sort_keys=True))
    return code


def main():
    raise SystemExit(run())


if __name__ == "__main__":
    main()
