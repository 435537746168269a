"""Command-line front end.

Subcommands:

* ``check``   evaluate an inequality spec on assigned distributions
* ``lemma``   tabulate one of the built-in limit/gap families
* ``search``  randomized violation search with a reproducible seed
* ``ratio``   empirical bracket of a ratio of entropy forms
* ``ruzsa``   cardinality/ratio table for simplex sets (alias ruzsa-table)
* ``embed``   digit-embedding demo verifying entropy preservation

Every machine-readable output embeds the package version, the seed (when
one is in play) and a short hash of the effective configuration, and
never embeds timestamps, so identical invocations give identical bytes.

Exit codes: 0 success / inequality satisfied, 1 violation found or
inequality failed, 2 usage error, 3 resource or model-domain error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys

import numpy as np

from entropylab import __version__
from entropylab import inequality as iq
from entropylab import io as textio
from entropylab.constructions import (
    default_embedding_base,
    embed,
    ruzsa_ratio,
    simplex_count,
    simplex_diffset_count,
    simplex_sumset_count,
    smoothing_gap,
)
from entropylab.errors import EntropyLabError, ResourceBoundError, SpecParseError
from entropylab.grid import (
    GridDensity,
    differential_entropy,
    gaussian_density,
    power_density,
    quantization_commutation_gap,
    renyi_gap,
    torus_commutation_gap,
    triangular_density,
    truncate,
    uniform_density,
)
from entropylab.info import int_frac_mutual_information
from entropylab.lattice import LatticePMF, linear_combination, shannon_entropy

USAGE_ERROR = 2
RESOURCE_ERROR = 3


# ---------------------------------------------------------------------------
# small parsing helpers


def parse_int_list(text: str) -> list[int]:
    """Accept ``"2,4,6"`` and ``"2..8"`` (inclusive range)."""
    text = text.strip()
    if ".." in text:
        lo_s, _, hi_s = text.partition("..")
        lo, hi = int(lo_s), int(hi_s)
        if hi < lo:
            raise ValueError(f"empty range {text!r}")
        return list(range(lo, hi + 1))
    return [int(tok) for tok in text.split(",") if tok.strip()]


def parse_eps(token: str) -> float:
    """Accept ``0.125``, ``1/8`` and ``2^-3`` spellings."""
    token = token.strip()
    try:
        if "^" in token:
            base, _, exp = token.partition("^")
            return float(base) ** int(exp)
        if "/" in token:
            num, _, den = token.partition("/")
            if float(den) == 0.0:
                raise ValueError("zero denominator")
            return float(num) / float(den)
        return float(token)
    except (ValueError, OverflowError) as exc:
        raise ValueError(f"cannot parse {token!r} as a width: {exc}") from None


def parse_matrix(text: str) -> list[list[int]]:
    """Rows separated by ``;``, entries by ``,`` — e.g. ``"1,1;1,-1"``."""
    rows = [[int(tok) for tok in row.split(",") if tok.strip()] for row in text.split(";")]
    if not rows or any(not r for r in rows):
        raise ValueError(f"malformed matrix {text!r}")
    if len({len(r) for r in rows}) != 1:
        raise ValueError("matrix rows have unequal lengths")
    return rows


def _config_hash(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:12]


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _table(rows: list[dict], columns: list[str], fmt: str, meta: dict) -> str:
    if fmt == "json":
        return json.dumps({**meta, "rows": rows}, indent=2, sort_keys=True) + "\n"
    lines = [f"# {key}={value}" for key, value in sorted(meta.items())]
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(repr(row[c]) if isinstance(row[c], float) else str(row[c]) for c in columns))
    return "\n".join(lines) + "\n"


def _meta(command: str, config: dict, seed: int | None = None) -> dict:
    meta = {"version": __version__, "command": command, "config": _config_hash(config)}
    if seed is not None:
        meta["seed"] = seed
    return meta


def _load_spec(token: str) -> iq.InequalitySpec:
    if token in iq.BUILTIN_SPEC_NAMES:
        return iq.builtin_spec(token)
    try:
        with open(token) as fh:
            text = fh.read()
    except OSError:
        raise SpecParseError(
            f"{token!r} is neither a spec file nor one of {', '.join(iq.BUILTIN_SPEC_NAMES)}", 1, 1
        ) from None
    return iq.parse_spec(text)


def _density_from_flags(args, *, unit_box: bool = False) -> GridDensity:
    name = args.density
    k = args.resolution
    if name == "power":
        return power_density(args.exponent, k)
    if name == "uniform":
        return uniform_density((0.0, 1.0), k)
    if name == "triangular":
        if unit_box:
            raise ValueError("the triangular density lives on [0, 2]; pick power or uniform")
        return triangular_density(k)
    if name == "gaussian":
        if unit_box:
            raise ValueError("the gaussian density is not supported on the unit box")
        return gaussian_density(0.0, args.sigma, args.trunc, k)
    raise ValueError(f"unknown density {name!r}")


# ---------------------------------------------------------------------------
# subcommand implementations


def _cmd_check(args) -> int:
    spec = _load_spec(args.spec)
    assignment = {}
    objective = None
    if args.witness:
        with open(args.witness) as fh:
            payload = json.load(fh)
        objective = payload.get("objective")
        for name, text in payload.get("witness", {}).items():
            assignment[name] = textio.loads(text)
        if args.side == "auto" and "side" in payload:
            args.side = payload["side"]
    for item in args.assign or []:
        name, _, path = item.partition("=")
        if not path:
            raise SpecParseError(f"--assign needs VAR=PATH, got {item!r}", 1, 1)
        assignment[name] = textio.load(path)
    if not assignment:
        raise SpecParseError("no distributions assigned (use --assign or --witness)", 1, 1)
    side = args.side
    if side == "auto":
        side = "continuous" if isinstance(next(iter(assignment.values())), GridDensity) else "discrete"
    evaluate = iq.evaluate_discrete if side == "discrete" else iq.evaluate_continuous
    report = evaluate(spec, assignment)
    config = {"spec": spec.text(), "side": side}
    payload = {**_meta("check", config), **report.to_dict()}
    if objective is not None:
        payload["witness_objective"] = objective
        payload["witness_replay_error"] = abs(report.weighted_sum - objective)
    if args.format == "json":
        _emit(json.dumps(payload, indent=2, sort_keys=True) + "\n", args.out)
    else:
        lines = []
        for row in report.rows:
            lin = " + ".join(
                f"{c}*{v}" for c, v in zip(row.coeffs, spec.variables) if c
            )
            lines.append(f"{row.alpha:+g} * H({lin}) = {row.entropy.value!r}")
        lines.append(f"weighted sum = {report.weighted_sum!r}")
        lines.append(f"slack = {report.slack!r}")
        lines.append("SATISFIED" if report.satisfied else "VIOLATED")
        _emit("\n".join(lines) + "\n", args.out)
    return 0 if report.satisfied else 1


def _lemma_rows(args) -> tuple[list[dict], list[str], dict]:
    subject = args.subject
    ks = parse_int_list(args.k) if args.k else None
    if subject == "renyi":
        ks = ks if ks is not None else [2, 4, 6, 8, 10, 12]
        f = _density_from_flags(args)
        rows = [{"k": k, "gap_nats": renyi_gap(f, k).value} for k in ks]
        cfg = {"density": args.density, "resolution": args.resolution, "k": ks}
        return rows, ["k", "gap_nats"], cfg
    if subject == "quantgap":
        ks = ks if ks is not None else list(range(0, args.resolution + 1, 2))
        coeffs = parse_int_list(args.coeffs)
        fs = [_density_from_flags(args, unit_box=True) for _ in coeffs]
        rows = [
            {"k": k, "gap_nats": quantization_commutation_gap(fs, coeffs, k).value} for k in ks
        ]
        cfg = {"density": args.density, "resolution": args.resolution, "coeffs": coeffs, "k": ks}
        return rows, ["k", "gap_nats"], cfg
    if subject == "truncate":
        ks = ks if ks is not None else [1, 2, 3, 4, 5, 6]
        f = gaussian_density(0.0, args.sigma, args.trunc, args.resolution)
        h_full = differential_entropy(f).value
        rows = [
            {"bound": n, "drift_nats": abs(differential_entropy(truncate(f, n)).value - h_full)}
            for n in ks
        ]
        cfg = {"sigma": args.sigma, "trunc": args.trunc, "resolution": args.resolution, "bounds": ks}
        return rows, ["bound", "drift_nats"], cfg
    if subject == "intfrac":
        ks = ks if ks is not None else [2, 3, 4, 5, 6, 7, 8]
        f = _density_from_flags(args, unit_box=True)
        rows = [{"k": k, "mi_nats": int_frac_mutual_information(f, k).value} for k in ks]
        cfg = {"density": args.density, "resolution": args.resolution, "k": ks}
        return rows, ["k", "mi_nats"], cfg
    if subject == "smoothing":
        eps_list = [parse_eps(tok) for tok in (args.eps or "2^-1,2^-3,2^-5").split(",")]
        u = LatticePMF.from_dict({i: 0.25 for i in range(4)})
        z = gaussian_density(0.0, args.sigma, args.trunc, args.resolution)
        rows = [{"eps": e, "gap_nats": smoothing_gap(u, z, e).value} for e in eps_list]
        cfg = {"sigma": args.sigma, "trunc": args.trunc, "resolution": args.resolution, "eps": eps_list}
        return rows, ["eps", "gap_nats"], cfg
    if subject == "torus":
        ks = ks if ks is not None else [2, 3, 4, 5, 6, 7, 8]
        coeffs = parse_int_list(args.coeffs)
        fs = [_density_from_flags(args, unit_box=True) for _ in coeffs]
        rows = [{"k": k, "gap_nats": torus_commutation_gap(fs, coeffs, k).value} for k in ks]
        cfg = {"density": args.density, "resolution": args.resolution, "coeffs": coeffs, "k": ks}
        return rows, ["k", "gap_nats"], cfg
    raise ValueError(f"unknown lemma subject {subject!r}")


def _cmd_lemma(args) -> int:
    rows, columns, cfg = _lemma_rows(args)
    cfg["subject"] = args.subject
    _emit(_table(rows, columns, args.format, _meta("lemma", cfg)), args.out)
    return 0


def _search_config(args) -> iq.SearchConfig:
    kwargs = {"seed": args.seed}
    for name in ("restarts", "steps", "max_support", "resolution", "trunc", "threads"):
        value = getattr(args, name, None)
        if value is not None:
            kwargs[name] = value
    return iq.SearchConfig(**kwargs)


def _cmd_search(args) -> int:
    spec = _load_spec(args.spec)
    config = _search_config(args)
    result = iq.search_violation(spec, args.side, config)
    meta = _meta("search", {"spec": spec.text(), "side": args.side, **config.to_dict()}, args.seed)
    payload = {**meta, **result.to_dict()}
    if not args.trace:
        payload.pop("trace")
    _emit(json.dumps(payload, indent=2, sort_keys=True) + "\n", args.out)
    return 1 if result.violation_found else 0


def _cmd_ratio(args) -> int:
    if args.name in iq.BUILTIN_RATIO_NAMES:
        num, den = iq.builtin_ratio(args.name)
    else:
        raise SpecParseError(
            f"unknown ratio {args.name!r}; choose from {', '.join(iq.BUILTIN_RATIO_NAMES)}", 1, 1
        )
    config = _search_config(args)
    bracket = iq.extremal_ratio(num, den, "discrete", config)
    meta = _meta(
        "ratio",
        {"numerator": num.text(), "denominator": den.text(), **config.to_dict()},
        args.seed,
    )
    _emit(json.dumps({**meta, **bracket.to_dict()}, indent=2, sort_keys=True) + "\n", args.out)
    return 0


def _cmd_ruzsa(args) -> int:
    ns = parse_int_list(args.n)
    level = args.L
    rows = []
    for n in ns:
        rows.append(
            {
                "n": n,
                "L": level,
                "size": simplex_count(n, level),
                "sumset": simplex_sumset_count(n, level),
                "diffset": simplex_diffset_count(n, level),
                "ratio": ruzsa_ratio(n, level),
            }
        )
    cfg = {"n": ns, "L": level}
    _emit(
        _table(rows, ["n", "L", "size", "sumset", "diffset", "ratio"], args.format, _meta("ruzsa", cfg)),
        args.out,
    )
    return 0


def _cmd_embed(args) -> int:
    if args.pmf:
        pmfs = [textio.load(path) for path in args.pmf]
        matrix = parse_matrix(args.matrix) if args.matrix else [[1] * len(pmfs)]
    else:
        pmfs = [LatticePMF.from_dict({i: 0.25 for i in range(4)}) for _ in range(2)]
        matrix = parse_matrix(args.matrix) if args.matrix else [[1, 1], [1, -1]]
    embedded = embed(pmfs, matrix, args.copies, base=args.base)
    rows = []
    worst = 0.0
    for row in matrix:
        base_row = linear_combination(pmfs, row)
        emb_row = linear_combination(embedded, row)
        expect = args.copies * shannon_entropy(base_row).value
        got = shannon_entropy(emb_row).value
        worst = max(worst, abs(got - expect))
        rows.append(
            {
                "row": " ".join(str(c) for c in row),
                "entropy_nats": got,
                "expected_nats": expect,
                "abs_error": abs(got - expect),
            }
        )
    base_used = args.base if args.base is not None else default_embedding_base(pmfs, np.asarray(matrix))
    cfg = {"matrix": matrix, "copies": args.copies, "base": base_used}
    meta = _meta("embed", cfg)
    meta["base"] = base_used
    meta["max_abs_error"] = worst
    _emit(
        _table(rows, ["row", "entropy_nats", "expected_nats", "abs_error"], args.format, meta),
        args.out,
    )
    return 0


# ---------------------------------------------------------------------------
# argument wiring


def _add_output_flags(p, default_format="json"):
    p.add_argument("--out", help="write output to this file instead of stdout")
    p.add_argument("--format", choices=("json", "csv"), default=default_format)


def _add_search_flags(p):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--restarts", type=int)
    p.add_argument("--steps", type=int)
    p.add_argument("--max-support", dest="max_support", type=int)
    p.add_argument("--resolution", type=int)
    p.add_argument("--trunc", type=float)
    p.add_argument("--threads", type=int, help="worker threads (default: ENTROPYLAB_THREADS or 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entropylab",
        description="entropy inequalities on lattices and dyadic grids",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="evaluate an inequality on given distributions")
    p.add_argument("spec", help="spec file or builtin name")
    p.add_argument("--assign", action="append", metavar="VAR=PATH")
    p.add_argument("--witness", help="JSON output of a previous search")
    p.add_argument("--side", choices=("auto", "discrete", "continuous"), default="auto")
    p.add_argument("--out", help="write output to this file instead of stdout")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("lemma", help="tabulate a built-in gap/limit family")
    p.add_argument(
        "subject", choices=("renyi", "quantgap", "truncate", "intfrac", "smoothing", "torus")
    )
    p.add_argument("--k", help="list '2,4,6' or range '2..8' of parameters")
    p.add_argument("--eps", help="comma list of smoothing widths (0.125, 1/8 or 2^-3)")
    p.add_argument("--coeffs", default="1,1", help="integer coefficients, default 1,1")
    p.add_argument(
        "--density",
        choices=("power", "uniform", "triangular", "gaussian"),
        default=None,
        help="default: uniform for quantgap, power elsewhere",
    )
    p.add_argument("--exponent", type=float, default=1.0, help="power density exponent")
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--trunc", type=float, default=8.0)
    p.add_argument("--resolution", type=int, default=None)
    _add_output_flags(p, default_format="csv")
    p.set_defaults(func=_cmd_lemma)

    p = sub.add_parser("search", help="randomized violation search")
    p.add_argument("spec", help="spec file or builtin name")
    p.add_argument("--side", choices=("discrete", "continuous"), default="discrete")
    p.add_argument("--trace", action="store_true", help="include the acceptance trace")
    _add_search_flags(p)
    _add_output_flags(p)
    p.set_defaults(func=_cmd_search)

    p = sub.add_parser("ratio", help="empirical bracket of a ratio of entropy forms")
    p.add_argument("name", help=f"builtin ratio name ({', '.join(iq.BUILTIN_RATIO_NAMES)})")
    _add_search_flags(p)
    _add_output_flags(p)
    p.set_defaults(func=_cmd_ratio)

    for alias in ("ruzsa", "ruzsa-table"):
        p = sub.add_parser(alias, help="simplex sumset/difference-set table")
        p.add_argument("--n", default="1..5", help="dimensions, list or range")
        p.add_argument("--L", type=int, default=64, help="simplex level")
        _add_output_flags(p, default_format="csv")
        p.set_defaults(func=_cmd_ruzsa)

    p = sub.add_parser("embed", help="digit embedding entropy-preservation demo")
    p.add_argument("--pmf", action="append", help="pmf file, one per variable (repeatable)")
    p.add_argument("--matrix", help="coefficient rows, e.g. '1,1;1,-1'")
    p.add_argument("--copies", type=int, default=3, help="tensor power per variable")
    p.add_argument("--base", type=int, help="embedding base (default: auto from row spans)")
    _add_output_flags(p, default_format="csv")
    p.set_defaults(func=_cmd_embed)

    return parser


_LEMMA_DEFAULT_RESOLUTION = {
    "renyi": 14,
    "quantgap": 10,
    "truncate": 8,
    "intfrac": 12,
    "smoothing": 8,
    "torus": 10,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "lemma":
        if args.resolution is None:
            args.resolution = _LEMMA_DEFAULT_RESOLUTION[args.subject]
        if args.density is None:
            args.density = "uniform" if args.subject == "quantgap" else "power"
    try:
        return args.func(args)
    except (SpecParseError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except ResourceBoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return RESOURCE_ERROR
    except (EntropyLabError, ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return RESOURCE_ERROR


if __name__ == "__main__":
    sys.exit(main())
