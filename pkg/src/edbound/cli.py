"""Command-line front end.

Subcommands: `bounds` (all applicable bound methods for one profile),
`sweep` (closed-form geometric bounds over gamma/lambda grids), `curve`
(fidelity and energy curve samples for plotting), `verify` (the built-in
verification suite).  Output is JSON or CSV with every numeric value
formatted to 12 significant digits, so identical requests produce
byte-identical reports.

Exit codes: 0 success, 1 verification failure, 2 malformed input,
3 degenerate or infeasible configuration.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import lower_bounds as lb
from . import upper_bounds as ub
from .profile import (
    GeometricSpec,
    StaircaseProfile,
    UNBOUNDED,
    expand_geometric,
    fidelity_at,
    make_staircase,
    truncation_level,
)
from .verify import DEFAULT_SEED, profile_bound_set, run_verification

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_BAD_INPUT = 2
EXIT_DEGENERATE = 3

_MAX_CURVE_LEVELS = 64


@dataclass(frozen=True)
class RunRequest:
    """Parsed invocation: which command, which profile, where output goes."""

    command: str
    profile: StaircaseProfile | GeometricSpec | None
    output_format: str
    output_path: str | None
    points: int
    seed: int
    tol: float
    gamma_values: tuple[float, ...] = ()
    lambda_values: tuple[float, ...] = ()


def fmt12(x: float) -> str:
    """12 significant digits; infinities serialize as the string inf."""
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return f"{x:.12g}"


def round12(x: float) -> float:
    if not math.isfinite(x):
        return x
    return float(fmt12(x))


def _parse_range(text: str, flag: str) -> tuple[float, ...]:
    """A scalar value or an a:b:n range with n >= 2 points."""
    parts = text.split(":")
    try:
        if len(parts) == 1:
            return (float(parts[0]),)
        if len(parts) == 3:
            a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
            if n < 2:
                raise ValueError
            return tuple(float(x) for x in np.linspace(a, b, n))
    except ValueError:
        pass
    raise ValueError(f"{flag} expects a value or a:b:n with n >= 2, got {text!r}")


def _parse_levels(text: str) -> int | float:
    if text == "inf":
        return UNBOUNDED
    try:
        k = int(text)
    except ValueError:
        raise ValueError(f"--levels expects a positive integer or 'inf', got {text!r}")
    if k < 1:
        raise ValueError("--levels must be at least 1")
    return k


def load_profile_file(path: str) -> StaircaseProfile | GeometricSpec:
    """Parse the profile JSON schema (staircase or geometric)."""
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ValueError(f"cannot read profile {path}: {exc}")
    if not isinstance(payload, dict) or "type" not in payload:
        raise ValueError("profile JSON must be an object with a 'type' field")
    kind = payload["type"]
    if kind == "staircase":
        if "q" not in payload or "a" not in payload:
            raise ValueError("staircase profile needs 'q' and 'a' arrays")
        return make_staircase(payload["q"], payload["a"])
    if kind == "geometric":
        for key in ("gamma", "lambda"):
            if key not in payload:
                raise ValueError(f"geometric profile needs '{key}'")
        levels = payload.get("levels", "inf")
        if levels == "inf":
            parsed: int | float = UNBOUNDED
        elif isinstance(levels, int) and not isinstance(levels, bool) and levels >= 1:
            parsed = levels
        else:
            raise ValueError("'levels' must be a positive integer or \"inf\"")
        return GeometricSpec(gamma=float(payload["gamma"]),
                             lam=float(payload["lambda"]), levels=parsed)
    raise ValueError(f"unknown profile type {kind!r}")


def _resolve_profile(args: argparse.Namespace) -> StaircaseProfile | GeometricSpec:
    inline = args.gamma is not None or getattr(args, "lam", None) is not None
    if args.profile is not None and inline:
        raise ValueError("give either --profile or inline --gamma/--lambda, not both")
    if args.profile is not None:
        return load_profile_file(args.profile)
    if not inline:
        raise ValueError("a profile is required (--profile or --gamma/--lambda)")
    if args.gamma is None or args.lam is None:
        raise ValueError("inline profiles need both --gamma and --lambda")
    gammas = _parse_range(args.gamma, "--gamma")
    lams = _parse_range(args.lam, "--lambda")
    if len(gammas) != 1 or len(lams) != 1:
        raise ValueError("this command takes single --gamma/--lambda values, not ranges")
    return GeometricSpec(gamma=gammas[0], lam=lams[0],
                         levels=_parse_levels(args.levels))


def _profile_echo(source: StaircaseProfile | GeometricSpec) -> dict:
    if isinstance(source, StaircaseProfile):
        return {"type": "staircase", "q": [round12(x) for x in source.q],
                "a": [round12(x) for x in source.a]}
    levels = "inf" if source.unbounded else int(source.levels)
    return {"type": "geometric", "gamma": round12(source.gamma),
            "lambda": round12(source.lam), "levels": levels}


def _emit(text: str, output_path: str | None) -> None:
    if output_path is None:
        sys.stdout.write(text)
    else:
        Path(output_path).write_text(text, encoding="utf-8")


def _to_json(payload: dict) -> str:
    return json.dumps(payload, indent=2) + "\n"


def _to_csv(header: list[str], rows: list[list[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# bounds


def _bound_records(source: StaircaseProfile | GeometricSpec, tol: float
                   ) -> list[dict]:
    """One record per applicable method.

    Unbounded geometric profiles get only the exact closed forms: finite
    truncations of the digital or layered scheme are not upper bounds for
    the infinite stair set.
    """
    if isinstance(source, GeometricSpec) and source.unbounded:
        thm3 = lb.thm3_geometric_lower(source)
        thm4 = ub.thm4_geometric_upper(source)
        return [
            {"method": "thm3", "direction": "lower", "energy": thm3.energy,
             "branch": thm3.branch, "e0_used": None},
            {"method": "thm4", "direction": "upper", "energy": thm4.energy,
             "branch": thm4.branch, "e0_used": None},
        ]
    p = source if isinstance(source, StaircaseProfile) else expand_geometric(
        source, int(source.levels))
    lowers, uppers, report = profile_bound_set(p, tol)
    records = []
    for r in lowers + uppers:
        rec = {"method": r.method, "direction": r.direction.value,
               "energy": r.energy, "branch": r.branch, "e0_used": None}
        if r.method in ("optimize_e0", "thm6"):
            rec["e0_used"] = report.e0_used if r.method == "optimize_e0" else \
                ub.thm6_two_level(p.n[0], p.n[1], p.a[0], p.a[1]).e0_used
        records.append(rec)
    return records


def cmd_bounds(req: RunRequest) -> int:
    records = _bound_records(req.profile, req.tol)
    lowers = [r["energy"] for r in records if r["direction"] == "lower"]
    uppers = [r["energy"] for r in records if r["direction"] == "upper"]
    best_lower = max(lowers)
    best_upper = min(uppers)
    infinite = best_lower <= 0.0
    gap = math.inf if infinite else best_upper / best_lower

    if req.output_format == "json":
        payload = {
            "profile": _profile_echo(req.profile),
            "records": [dict(r, energy=round12(r["energy"]),
                             e0_used=None if r["e0_used"] is None else round12(r["e0_used"]))
                        for r in records],
            "best_lower": round12(best_lower),
            "best_upper": round12(best_upper),
            "gap": None if infinite else round12(gap),
            "gap_infinite": infinite,
        }
        _emit(_to_json(payload), req.output_path)
    else:
        header = ["method", "direction", "energy", "branch", "e0_used"]
        rows = [[r["method"], r["direction"], fmt12(r["energy"]),
                 r["branch"] or "", "" if r["e0_used"] is None else fmt12(r["e0_used"])]
                for r in records]
        rows.append(["best_lower", "lower", fmt12(best_lower), "", ""])
        rows.append(["best_upper", "upper", fmt12(best_upper), "", ""])
        rows.append(["gap", "", "inf" if infinite else fmt12(gap), "", ""])
        _emit(_to_csv(header, rows), req.output_path)
    return EXIT_OK


# ---------------------------------------------------------------------------
# sweep


def cmd_sweep(req: RunRequest) -> int:
    rows = []
    for g in req.gamma_values:
        for l in req.lambda_values:
            lower = max(0.0, math.log(l / 4.0) / (g - 1.0))
            upper = math.log(l) / (g - 1.0)
            z = (l - 1.0) / g if l >= g else 0.0
            gap = math.inf if lower <= 0.0 else upper / lower
            rows.append((g, l, lower, upper, z, gap))

    if req.output_format == "json":
        payload = {"rows": [
            {"gamma": round12(g), "lambda": round12(l),
             "lower_thm3": round12(lo), "upper_thm4": round12(up),
             "z_geometric": round12(z),
             "gap": None if math.isinf(gap) else round12(gap),
             "gap_infinite": math.isinf(gap)}
            for (g, l, lo, up, z, gap) in rows]}
        _emit(_to_json(payload), req.output_path)
    else:
        header = ["gamma", "lambda", "lower_thm3", "upper_thm4", "z_geometric", "gap"]
        csv_rows = [[fmt12(g), fmt12(l), fmt12(lo), fmt12(up), fmt12(z),
                     "inf" if math.isinf(gap) else fmt12(gap)]
                    for (g, l, lo, up, z, gap) in rows]
        _emit(_to_csv(header, csv_rows), req.output_path)
    return EXIT_OK


# ---------------------------------------------------------------------------
# curve


def _curve_profile(source: StaircaseProfile | GeometricSpec, tol: float
                   ) -> tuple[StaircaseProfile, int | None, bool]:
    """Materialize the profile; flag the degenerate unbounded lam < gamma case."""
    if isinstance(source, StaircaseProfile):
        return source, None, False
    if not source.unbounded:
        return expand_geometric(source, int(source.levels)), None, False
    degenerate = source.lam < source.gamma
    cap = min(truncation_level(source, tol),
              int(700.0 / math.log(source.lam)), _MAX_CURVE_LEVELS)
    cap = max(cap, 1)
    return expand_geometric(source, cap), cap, degenerate


def cmd_curve(req: RunRequest) -> int:
    p, levels_used, degenerate = _curve_profile(req.profile, req.tol)

    if degenerate:
        # Feasibility cap is 0 in the limit: only the digital-only row exists.
        e0_used = 0.0
        note = "degenerate: feasibility cap Z = 0, only e0 = 0 is admissible"
        energy_rows = [(0.0, ub.digital_only_energy(p).energy, True)]
        z = 0.0
    else:
        report = ub.optimize_e0(p, req.tol)
        e0_used, z, note = report.e0_used, report.z, None
        e0_grid = sorted(set(
            float(x) for x in np.linspace(0.0, z, req.points)) | {e0_used})
        energy_rows = [(e0, ub.total_energy(p, e0), e0 == e0_used)
                       for e0 in e0_grid]

    cfg = ub.SchemeConfig(e0=e0_used, beta=ub.beta_star(p, e0_used))
    q_grid = sorted(set(
        float(x) for x in np.geomspace(p.q[0] / 10.0, 10.0 * p.q[-1],
                                       req.points)) | set(p.q))
    fidelity_rows = [(Q, fidelity_at(p, Q), ub.achieved_fidelity(p, cfg, Q))
                     for Q in q_grid]

    if req.output_format == "json":
        payload = {
            "profile": _profile_echo(req.profile),
            "levels_used": levels_used,
            "scheme": {"e0_used": round12(e0_used), "z": round12(z)},
            "note": note,
            "fidelity_curve": [
                {"q": round12(Q), "profile_fidelity": round12(pf),
                 "achieved_fidelity": round12(af)}
                for (Q, pf, af) in fidelity_rows],
            "energy_curve": [
                {"e0": round12(e0), "total_energy": round12(E), "minimizer": flag}
                for (e0, E, flag) in energy_rows],
        }
        _emit(_to_json(payload), req.output_path)
    else:
        header = ["table", "x", "profile_fidelity", "achieved_fidelity",
                  "total_energy", "minimizer"]
        rows = [["fidelity", fmt12(Q), fmt12(pf), fmt12(af), "", ""]
                for (Q, pf, af) in fidelity_rows]
        rows += [["energy", fmt12(e0), "", "", fmt12(E), "1" if flag else ""]
                 for (e0, E, flag) in energy_rows]
        _emit(_to_csv(header, rows), req.output_path)
    return EXIT_DEGENERATE if degenerate else EXIT_OK


# ---------------------------------------------------------------------------
# verify


def cmd_verify(req: RunRequest, tol_override: float | None) -> int:
    profile = None
    if req.profile is not None:
        profile = req.profile if isinstance(req.profile, StaircaseProfile) else \
            _curve_profile(req.profile, 1e-9)[0]
    results = run_verification(seed=req.seed, tol_override=tol_override,
                               profile=profile)
    all_passed = all(r.passed for r in results)

    if req.output_format == "json":
        payload = {
            "seed": req.seed,
            "checks": [{"name": r.name, "passed": r.passed,
                        "margin": round12(r.margin), "detail": r.detail}
                       for r in results],
            "passed": all_passed,
        }
        _emit(_to_json(payload), req.output_path)
    else:
        header = ["name", "passed", "margin", "detail"]
        rows = [[r.name, "1" if r.passed else "0", fmt12(r.margin), r.detail]
                for r in results]
        _emit(_to_csv(header, rows), req.output_path)
    return EXIT_OK if all_passed else EXIT_VERIFY_FAILED


# ---------------------------------------------------------------------------
# argument parsing and dispatch


def _add_common(sub: argparse.ArgumentParser, profile_flags: bool = True) -> None:
    if profile_flags:
        sub.add_argument("--profile", help="path to a profile JSON file")
        sub.add_argument("--gamma", help="geometric breakpoint ratio (or a:b:n for sweep)")
        sub.add_argument("--lambda", dest="lam",
                         help="geometric fidelity ratio (or a:b:n for sweep)")
        sub.add_argument("--levels", default="inf",
                         help="stair count for inline geometric profiles (default inf)")
    sub.add_argument("--format", choices=("json", "csv"), default="json")
    sub.add_argument("--out", help="output path (default: stdout)")
    sub.add_argument("--points", type=int, default=101,
                     help="sample count for curve grids")
    sub.add_argument("--seed", type=int, default=DEFAULT_SEED)
    sub.add_argument("--tol", type=float, default=1e-9,
                     help="solver/truncation tolerance; for verify, overrides "
                          "every check tolerance")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="edbound",
        description="Energy bounds for staircase fidelity-quality profiles.")
    subs = parser.add_subparsers(dest="command", required=True)
    for name, needs_profile in (("bounds", True), ("sweep", True),
                                ("curve", True), ("verify", True)):
        sub = subs.add_parser(name)
        _add_common(sub, profile_flags=needs_profile)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        if args.command == "sweep":
            if args.gamma is None or args.lam is None:
                raise ValueError("sweep needs --gamma and --lambda ranges")
            gammas = _parse_range(args.gamma, "--gamma")
            lams = _parse_range(args.lam, "--lambda")
            if any(g <= 1.0 for g in gammas) or any(l <= 1.0 for l in lams):
                raise ValueError("sweep ranges must stay within (1, inf)")
            req = RunRequest(command="sweep", profile=None,
                             output_format=args.format, output_path=args.out,
                             points=args.points, seed=args.seed, tol=args.tol,
                             gamma_values=gammas, lambda_values=lams)
            return cmd_sweep(req)

        if args.command == "verify":
            profile = None
            if args.profile is not None or args.gamma is not None:
                profile = _resolve_profile(args)
            # An explicitly supplied --tol overrides every check tolerance;
            # --tol 0 is the supported fault-injection path.
            tokens = argv if argv is not None else sys.argv[1:]
            supplied = any(t == "--tol" or t.startswith("--tol=") for t in tokens)
            req = RunRequest(command="verify", profile=profile,
                             output_format=args.format, output_path=args.out,
                             points=args.points, seed=args.seed, tol=args.tol)
            return cmd_verify(req, tol_override=args.tol if supplied else None)

        profile = _resolve_profile(args)
        if args.tol <= 0.0:
            raise ValueError("--tol must be positive")
        req = RunRequest(command=args.command, profile=profile,
                         output_format=args.format, output_path=args.out,
                         points=args.points, seed=args.seed, tol=args.tol)
        if args.command == "bounds":
            return cmd_bounds(req)
        if args.points < 2:
            raise ValueError("--points must be at least 2")
        return cmd_curve(req)
    except ub.InfeasibleError as exc:
        print(f"edbound: infeasible: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except ValueError as exc:
        print(f"edbound: error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
