"""Linear entropy inequalities: parsing, evaluation, and violation search.

An inequality specification is a weighted sum of row entropies

    sum_i alpha_i * H(sum_j a_ij X_j)  <=  0

with real weights alpha_i and integer coefficient rows a_ij, plus an
optional partition of the variables into iid classes.  The text grammar:

    spec  ::=  term (('+'|'-') term)* '<=' '0'
    term  ::=  [coef '*'] 'H' '(' lin ')'
    lin   ::=  [int '*'] var (('+'|'-') [int '*'] var)*

with an optional line ``iid: {X, X'} {Y, Y'}``.  Rows are normalized by
the gcd of their coefficients; a specification is *balanced* when the
alpha weights sum to zero, which is what makes its truth invariant
under dilation on the discrete side and under scaling on the continuous
side.

Evaluation realizes the iid constraint structurally: one distribution
object per class, convolved once per row occurrence, so distributional
equality is never "tested", it is true by construction.  The violation
search runs seeded random restarts with annealed pairwise mass-transfer
moves and support growth; restarts own private generator streams
derived from (seed, restart index), so results are independent of
scheduling and reproducible byte for byte.
"""

from __future__ import annotations

import math
import os
import re
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from entropylab.errors import SpecParseError
from entropylab.grid import GridDensity, density_linear_combination, differential_entropy, gaussian_density
from entropylab.lattice import LatticePMF, linear_combination, shannon_entropy
from entropylab.nats import Nats
from entropylab import io as textio

__all__ = [
    "InequalitySpec",
    "RowEval",
    "EvalReport",
    "SearchConfig",
    "SearchResult",
    "RatioBracket",
    "parse_spec",
    "parse_form",
    "evaluate_discrete",
    "evaluate_continuous",
    "search_violation",
    "extremal_ratio",
    "builtin_spec",
    "builtin_ratio",
    "dilation_comparison_spec",
    "BUILTIN_SPEC_NAMES",
    "BUILTIN_RATIO_NAMES",
]

DISCRETE_TOL = 1e-9
CONTINUOUS_TOL = 1e-6
BALANCE_TOL = 1e-12
DEGENERATE_DENOMINATOR = 1e-6


# ---------------------------------------------------------------------------
# specification object and parser


@dataclass(frozen=True)
class InequalitySpec:
    """A weighted sum of row entropies compared against zero."""

    variables: tuple[str, ...]
    alphas: tuple[float, ...]
    rows: tuple[tuple[int, ...], ...]
    iid_classes: tuple[tuple[str, ...], ...]

    def __post_init__(self):
        if len(self.alphas) != len(self.rows):
            raise ValueError("one alpha weight per row required")
        norm_rows = []
        for row in self.rows:
            if len(row) != len(self.variables):
                raise ValueError("each row needs one coefficient per variable")
            nonzero = [abs(c) for c in row if c != 0]
            if not nonzero:
                raise ValueError("empty row: H(0) is not defined")
            g = math.gcd(*nonzero)
            norm_rows.append(tuple(int(c) // g for c in row))
        object.__setattr__(self, "rows", tuple(norm_rows))
        seen = set()
        for cls in self.iid_classes:
            for v in cls:
                if v not in self.variables:
                    raise ValueError(f"iid class mentions unknown variable {v!r}")
                if v in seen:
                    raise ValueError(f"variable {v!r} appears in two iid classes")
                seen.add(v)
        classes = list(self.iid_classes)
        for v in self.variables:
            if v not in seen:
                classes.append((v,))
        object.__setattr__(self, "iid_classes", tuple(classes))

    @property
    def is_balanced(self) -> bool:
        return abs(math.fsum(self.alphas)) <= BALANCE_TOL

    def class_of(self, variable: str) -> tuple[str, ...]:
        for cls in self.iid_classes:
            if variable in cls:
                return cls
        raise KeyError(variable)

    def representatives(self) -> tuple[str, ...]:
        return tuple(cls[0] for cls in self.iid_classes)

    def text(self) -> str:
        """Render back to the grammar (one canonical form)."""
        parts = []
        for i, (alpha, row) in enumerate(zip(self.alphas, self.rows)):
            mag = abs(alpha)
            term = "" if mag == 1.0 else f"{mag:g}*"
            lin = []
            for c, v in zip(row, self.variables):
                if c == 0:
                    continue
                s = "-" if c < 0 else ("+" if lin else "")
                mag_c = abs(c)
                lin.append(f"{s}{'' if mag_c == 1 else f'{mag_c}*'}{v}")
            sign = "-" if alpha < 0 else ("+" if i else "")
            parts.append(f"{sign} {term}H({''.join(lin)})" if i else f"{sign}{term}H({''.join(lin)})")
        text = " ".join(parts) + " <= 0"
        nontrivial = [cls for cls in self.iid_classes if len(cls) > 1]
        if nontrivial:
            groups = " ".join("{" + ", ".join(cls) + "}" for cls in nontrivial)
            text += f"\niid: {groups}"
        return text


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*'*)"
    r"|(?P<le><=)"
    r"|(?P<sym>[-+*(){},:]))"
)


def _tokenize(line: str, lineno: int):
    tokens = []
    pos = 0
    while pos < len(line):
        m = _TOKEN_RE.match(line, pos)
        if m is None or m.end() == pos:
            stripped = line[pos:].lstrip()
            if not stripped:
                break
            raise SpecParseError(f"unexpected character {stripped[0]!r}", lineno, pos + 1)
        pos = m.end()
        kind = m.lastgroup
        value = m.group(kind)
        tokens.append((kind, value, lineno, m.start(kind) + 1))
    return tokens


class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self):
        tok = self.peek()
        if tok is None:
            last = self.tokens[-1] if self.tokens else ("", "", 1, 1)
            raise SpecParseError("unexpected end of input", last[2], last[3])
        self.pos += 1
        return tok

    def expect(self, kind, value=None, what=""):
        tok = self.next()
        if tok[0] != kind or (value is not None and tok[1] != value):
            raise SpecParseError(f"expected {what or value or kind}, got {tok[1]!r}", tok[2], tok[3])
        return tok

    def parse_expr(self):
        terms = []
        sign = 1.0
        tok = self.peek()
        if tok and tok[0] == "sym" and tok[1] in "+-":
            self.next()
            sign = -1.0 if tok[1] == "-" else 1.0
        terms.append(self.parse_term(sign))
        while True:
            tok = self.peek()
            if tok is None or not (tok[0] == "sym" and tok[1] in "+-"):
                break
            self.next()
            terms.append(self.parse_term(-1.0 if tok[1] == "-" else 1.0))
        return terms

    def parse_term(self, sign: float):
        tok = self.peek()
        alpha = 1.0
        if tok and tok[0] == "num":
            self.next()
            alpha = float(tok[1])
            self.expect("sym", "*", "'*' after a row weight")
        tok = self.expect("ident", what="'H'")
        if tok[1] != "H":
            raise SpecParseError(f"expected 'H', got {tok[1]!r}", tok[2], tok[3])
        self.expect("sym", "(", "'('")
        lin = self.parse_lin()
        self.expect("sym", ")", "')'")
        return sign * alpha, lin

    def parse_lin(self):
        coeffs: dict[str, int] = {}
        order: list[str] = []
        sign = 1
        tok = self.peek()
        if tok and tok[0] == "sym" and tok[1] in "+-":
            self.next()
            sign = -1 if tok[1] == "-" else 1
        self._lin_term(coeffs, order, sign)
        while True:
            tok = self.peek()
            if tok is None or not (tok[0] == "sym" and tok[1] in "+-"):
                break
            self.next()
            self._lin_term(coeffs, order, -1 if tok[1] == "-" else 1)
        return coeffs, order

    def _lin_term(self, coeffs, order, sign):
        tok = self.next()
        coef = 1
        if tok[0] == "num":
            if not tok[1].isdigit():
                raise SpecParseError(
                    f"non-integer coefficient {tok[1]!r} inside H(...)", tok[2], tok[3]
                )
            coef = int(tok[1])
            self.expect("sym", "*", "'*' after a coefficient")
            tok = self.next()
        if tok[0] != "ident" or tok[1] == "H":
            raise SpecParseError(f"expected a variable name, got {tok[1]!r}", tok[2], tok[3])
        name = tok[1]
        if name not in coeffs:
            coeffs[name] = 0
            order.append(name)
        coeffs[name] += sign * coef


def _parse_iid_line(line: str, lineno: int) -> list[tuple[str, ...]]:
    tokens = _tokenize(line, lineno)
    classes = []
    pos = 0
    while pos < len(tokens):
        tok = tokens[pos]
        if tok[0] != "sym" or tok[1] != "{":
            raise SpecParseError("expected '{' starting an iid class", tok[2], tok[3])
        pos += 1
        members = []
        while True:
            tok = tokens[pos] if pos < len(tokens) else None
            if tok is None:
                raise SpecParseError("unterminated iid class", lineno, len(line))
            if tok[0] == "ident":
                members.append(tok[1])
                pos += 1
                tok = tokens[pos] if pos < len(tokens) else None
                if tok and tok[0] == "sym" and tok[1] == ",":
                    pos += 1
                    continue
                continue
            if tok[0] == "sym" and tok[1] == "}":
                pos += 1
                break
            raise SpecParseError(f"unexpected token {tok[1]!r} in iid class", tok[2], tok[3])
        if len(members) < 1:
            raise SpecParseError("empty iid class", lineno, 1)
        classes.append(tuple(members))
    if not classes:
        raise SpecParseError("iid: line declares no classes", lineno, 1)
    return classes


def _parse_terms(text: str, require_relation: bool):
    expr_tokens = []
    iid_classes: list[tuple[str, ...]] = []
    for lineno, raw in enumerate(text.splitlines() or [""], start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        if line.lstrip().lower().startswith("iid"):
            rest = line.lstrip()[3:].lstrip()
            if not rest.startswith(":"):
                raise SpecParseError("expected ':' after 'iid'", lineno, 1)
            iid_classes.extend(_parse_iid_line(rest[1:], lineno))
            continue
        expr_tokens.extend(_tokenize(line, lineno))
    if not expr_tokens:
        raise SpecParseError("no inequality found", 1, 1)
    parser = _Parser(expr_tokens)
    terms = parser.parse_expr()
    if require_relation:
        parser.expect("le", what="'<='")
        tok = parser.expect("num", what="'0'")
        if float(tok[1]) != 0.0:
            raise SpecParseError("the right-hand side must be 0", tok[2], tok[3])
    tok = parser.peek()
    if tok is not None:
        raise SpecParseError(f"unexpected trailing token {tok[1]!r}", tok[2], tok[3])
    variables: list[str] = []
    for _, (coeffs, order) in terms:
        for name in order:
            if name not in variables:
                variables.append(name)
    alphas = []
    rows = []
    for alpha, (coeffs, _) in terms:
        alphas.append(alpha)
        rows.append(tuple(coeffs.get(v, 0) for v in variables))
    return InequalitySpec(
        variables=tuple(variables),
        alphas=tuple(alphas),
        rows=tuple(rows),
        iid_classes=tuple(iid_classes),
    )


def parse_spec(text: str) -> InequalitySpec:
    """Parse a full inequality ``... <= 0`` with an optional iid line."""
    return _parse_terms(text, require_relation=True)


def parse_form(text: str) -> InequalitySpec:
    """Parse a bare weighted sum of entropies (no relation)."""
    return _parse_terms(text, require_relation=False)


# ---------------------------------------------------------------------------
# evaluation


@dataclass(frozen=True)
class RowEval:
    alpha: float
    coeffs: tuple[int, ...]
    entropy: Nats


@dataclass(frozen=True)
class EvalReport:
    rows: tuple[RowEval, ...]
    weighted_sum: float
    slack: float
    satisfied: bool
    tolerance: float
    side: str
    warnings: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "side": self.side,
            "tolerance": self.tolerance,
            "weighted_sum": self.weighted_sum,
            "slack": self.slack,
            "satisfied": self.satisfied,
            "rows": [
                {
                    "alpha": r.alpha,
                    "coeffs": list(r.coeffs),
                    "entropy": r.entropy.value,
                    "entropy_err": r.entropy.err,
                }
                for r in self.rows
            ],
            "warnings": list(self.warnings),
        }


def _resolve_assignment(spec: InequalitySpec, assignment: Mapping):
    resolved = {}
    for cls in spec.iid_classes:
        given = [(v, assignment[v]) for v in cls if v in assignment]
        if not given:
            raise KeyError(f"no distribution assigned to iid class {cls}")
        obj = given[0][1]
        for v, other in given[1:]:
            if other is not obj:
                raise ValueError(
                    f"iid class {cls} must be assigned one shared distribution object; "
                    f"{v!r} differs"
                )
        for v in cls:
            resolved[v] = obj
    return resolved


def _evaluate(spec, assignment, side, combiner, entropy_fn, tolerance):
    resolved = _resolve_assignment(spec, assignment)
    rows = []
    for alpha, row in zip(spec.alphas, spec.rows):
        dist = combiner([resolved[v] for v in spec.variables], row)
        rows.append(RowEval(alpha=alpha, coeffs=row, entropy=entropy_fn(dist)))
    weighted = math.fsum(r.alpha * r.entropy.value for r in rows)
    notes = []
    if side == "continuous" and not spec.is_balanced:
        msg = (
            "unbalanced weights: the continuous value shifts by (sum alpha)*d*ln(a) "
            "under scaling, so its sign is scale-dependent"
        )
        warnings.warn(msg, UserWarning, stacklevel=3)
        notes.append(msg)
    slack = 0.0 - weighted
    return EvalReport(
        rows=tuple(rows),
        weighted_sum=weighted,
        slack=slack,
        satisfied=slack >= -tolerance,
        tolerance=tolerance,
        side=side,
        warnings=tuple(notes),
    )


def evaluate_discrete(
    spec: InequalitySpec,
    assignment: Mapping[str, LatticePMF],
    tolerance: float = DISCRETE_TOL,
) -> EvalReport:
    """Evaluate every row on lattice pmfs; slack = 0 - weighted sum."""
    return _evaluate(spec, assignment, "discrete", linear_combination, shannon_entropy, tolerance)


def evaluate_continuous(
    spec: InequalitySpec,
    assignment: Mapping[str, GridDensity],
    tolerance: float = CONTINUOUS_TOL,
) -> EvalReport:
    """Evaluate every row on grid densities via cell-level convolution."""
    return _evaluate(
        spec, assignment, "continuous", density_linear_combination, differential_entropy, tolerance
    )


# ---------------------------------------------------------------------------
# violation search


@dataclass(frozen=True)
class SearchConfig:
    seed: int = 0
    restarts: int = 40
    steps: int = 60
    max_support: int = 8
    coord_range: int = 9
    resolution: int = 6
    trunc: float = 8.0
    sigma_log2: tuple[float, float] = (-4.0, 2.0)
    threads: int | None = None

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "restarts": self.restarts,
            "steps": self.steps,
            "max_support": self.max_support,
            "coord_range": self.coord_range,
            "resolution": self.resolution,
            "trunc": self.trunc,
            "sigma_log2": list(self.sigma_log2),
            "threads": self.threads,
        }


@dataclass(frozen=True)
class SearchResult:
    objective: float
    witness: dict
    trace: tuple
    seed: int
    side: str
    violation_found: bool

    def to_dict(self) -> dict:
        return {
            "objective": self.objective,
            "violation_found": self.violation_found,
            "seed": self.seed,
            "side": self.side,
            "witness": {name: textio.dumps(dist) for name, dist in sorted(self.witness.items())},
            "trace": [list(t) for t in self.trace],
        }


_STEP_SIZES = (0.5, 0.1, 0.02)


def _thread_count(config: SearchConfig) -> int:
    if config.threads is not None:
        return max(1, int(config.threads))
    env = os.environ.get("ENTROPYLAB_THREADS", "").strip()
    return max(1, int(env)) if env else 1


def _random_pmf(rng: np.random.Generator, config: SearchConfig) -> LatticePMF:
    size = int(rng.integers(2, config.max_support + 1))
    coords = rng.choice(
        np.arange(-config.coord_range, config.coord_range + 1), size=size, replace=False
    )
    masses = rng.dirichlet(np.ones(size))
    # dirichlet can emit exact zeros in extreme draws; nudge and renormalize
    masses = np.clip(masses, 1e-12, None)
    masses /= masses.sum()
    return LatticePMF(coords.reshape(-1, 1), masses)


def _mutate_pmf(
    pmf: LatticePMF, rng: np.random.Generator, step: float, config: SearchConfig
) -> LatticePMF:
    points = pmf.points
    masses = pmf.masses.copy()
    grow = len(pmf) < config.max_support and rng.random() < 0.15
    if grow:
        existing = {int(p) for p in points[:, 0].tolist()}
        candidates = [
            c for c in range(-config.coord_range, config.coord_range + 1) if c not in existing
        ]
        new_point = int(rng.choice(np.asarray(candidates)))
        donor = int(np.argmax(masses))
        moved = masses[donor] * step
        masses[donor] -= moved
        points = np.vstack([points, [[new_point]]])
        masses = np.append(masses, moved)
    else:
        if len(masses) < 2:
            return pmf
        i, j = rng.choice(len(masses), size=2, replace=False)
        moved = masses[i] * step
        masses[i] -= moved
        masses[j] += moved
    keep = masses > 1e-12
    points = points[keep]
    masses = masses[keep]
    return LatticePMF(points, masses / math.fsum(masses))


def _search_restart_discrete(spec, config, ridx):
    rng = np.random.default_rng(np.random.SeedSequence([config.seed, ridx]))
    reps = spec.representatives()
    witness = {r: _random_pmf(rng, config) for r in reps}

    def objective(w):
        assignment = {}
        for cls in spec.iid_classes:
            for v in cls:
                assignment[v] = w[cls[0]]
        return evaluate_discrete(spec, assignment).weighted_sum

    best = objective(witness)
    trace = [(ridx, -1, best)]
    per_phase = max(1, config.steps // len(_STEP_SIZES))
    step_no = 0
    for step in _STEP_SIZES:
        for _ in range(per_phase):
            name = reps[int(rng.integers(len(reps)))]
            candidate = dict(witness)
            candidate[name] = _mutate_pmf(witness[name], rng, step, config)
            value = objective(candidate)
            if value > best:
                best = value
                witness = candidate
                trace.append((ridx, step_no, best))
            step_no += 1
    return best, witness, trace


def _search_restart_continuous(spec, config, ridx):
    rng = np.random.default_rng(np.random.SeedSequence([config.seed, ridx]))
    reps = spec.representatives()
    lo, hi = config.sigma_log2
    sigmas = {r: 2.0 ** rng.uniform(lo, hi) for r in reps}

    def density(sigma):
        return gaussian_density(0.0, sigma, config.trunc, config.resolution)

    def objective(sg):
        cache = {r: density(s) for r, s in sg.items()}
        assignment = {}
        for cls in spec.iid_classes:
            for v in cls:
                assignment[v] = cache[cls[0]]
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return evaluate_continuous(spec, assignment).weighted_sum

    best = objective(sigmas)
    trace = [(ridx, -1, best)]
    per_phase = max(1, config.steps // len(_STEP_SIZES))
    step_no = 0
    for step in _STEP_SIZES:
        for _ in range(per_phase):
            name = reps[int(rng.integers(len(reps)))]
            factor = 2.0 ** (step if rng.random() < 0.5 else -step)
            candidate = dict(sigmas)
            candidate[name] = min(max(candidate[name] * factor, 2.0**lo), 2.0**hi)
            value = objective(candidate)
            if value > best:
                best = value
                sigmas = candidate
                trace.append((ridx, step_no, best))
            step_no += 1
    witness = {r: density(s) for r, s in sigmas.items()}
    return best, witness, trace


def search_violation(spec: InequalitySpec, side: str, config: SearchConfig) -> SearchResult:
    """Maximize the weighted sum over seeded random-restart local search.

    The result depends only on (spec, side, config), not on thread
    scheduling: each restart owns a generator stream keyed by the seed
    and its index, and merging keeps the best objective with ties broken
    by restart index.
    """
    if side not in ("discrete", "continuous"):
        raise ValueError("side must be 'discrete' or 'continuous'")
    run = _search_restart_discrete if side == "discrete" else _search_restart_continuous
    indices = range(config.restarts)
    workers = _thread_count(config)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(lambda r: run(spec, config, r), indices))
    else:
        outcomes = [run(spec, config, r) for r in indices]
    best_idx = 0
    for i in range(1, len(outcomes)):
        if outcomes[i][0] > outcomes[best_idx][0]:
            best_idx = i
    best, witness, _ = outcomes[best_idx]
    trace = tuple(entry for _, _, tr in outcomes for entry in tr)
    tol = DISCRETE_TOL if side == "discrete" else CONTINUOUS_TOL
    return SearchResult(
        objective=best,
        witness=witness,
        trace=trace,
        seed=config.seed,
        side=side,
        violation_found=best > tol,
    )


# ---------------------------------------------------------------------------
# extremal ratios


@dataclass(frozen=True)
class RatioBracket:
    lo: float
    hi: float
    lo_witness: dict
    hi_witness: dict
    visited: int
    rejected: int
    seed: int
    side: str

    def to_dict(self) -> dict:
        return {
            "lo": self.lo,
            "hi": self.hi,
            "visited": self.visited,
            "rejected": self.rejected,
            "seed": self.seed,
            "side": self.side,
            "lo_witness": {n: textio.dumps(d) for n, d in sorted(self.lo_witness.items())},
            "hi_witness": {n: textio.dumps(d) for n, d in sorted(self.hi_witness.items())},
        }


def extremal_ratio(
    numerator: InequalitySpec,
    denominator: InequalitySpec,
    side: str,
    config: SearchConfig,
) -> RatioBracket:
    """Empirical bracket of (numerator sum) / (denominator sum).

    Candidates whose denominator is smaller than 1e-6 in absolute value
    are rejected as degenerate; if every candidate is rejected a
    ValueError is raised.
    """
    if side != "discrete":
        raise ValueError("extremal_ratio currently searches discrete candidates only")
    if numerator.variables != denominator.variables or numerator.iid_classes != denominator.iid_classes:
        raise ValueError("numerator and denominator must share variables and iid classes")
    spec = numerator
    reps = spec.representatives()

    state = {
        "lo": math.inf,
        "hi": -math.inf,
        "lo_witness": None,
        "hi_witness": None,
        "visited": 0,
        "rejected": 0,
    }

    def ratio_of(witness):
        assignment = {}
        for cls in spec.iid_classes:
            for v in cls:
                assignment[v] = witness[cls[0]]
        num = evaluate_discrete(numerator, assignment).weighted_sum
        den = evaluate_discrete(denominator, assignment).weighted_sum
        state["visited"] += 1
        if abs(den) < DEGENERATE_DENOMINATOR:
            state["rejected"] += 1
            return None
        r = num / den
        if r < state["lo"]:
            state["lo"] = r
            state["lo_witness"] = dict(witness)
        if r > state["hi"]:
            state["hi"] = r
            state["hi_witness"] = dict(witness)
        return r

    per_phase = max(1, config.steps // len(_STEP_SIZES))
    for ridx in range(config.restarts):
        for direction in (1.0, -1.0):
            rng = np.random.default_rng(
                np.random.SeedSequence([config.seed, ridx, 0 if direction > 0 else 1])
            )
            witness = {r: _random_pmf(rng, config) for r in reps}
            current = ratio_of(witness)
            step_no = 0
            for step in _STEP_SIZES:
                for _ in range(per_phase):
                    name = reps[int(rng.integers(len(reps)))]
                    candidate = dict(witness)
                    candidate[name] = _mutate_pmf(witness[name], rng, step, config)
                    value = ratio_of(candidate)
                    step_no += 1
                    if value is None:
                        continue
                    if current is None or direction * value > direction * current:
                        current = value
                        witness = candidate
    if state["lo_witness"] is None:
        raise ValueError("all candidates had a degenerate denominator")
    return RatioBracket(
        lo=state["lo"],
        hi=state["hi"],
        lo_witness=state["lo_witness"],
        hi_witness=state["hi_witness"],
        visited=state["visited"],
        rejected=state["rejected"],
        seed=config.seed,
        side=side,
    )


# ---------------------------------------------------------------------------
# built-in specifications


_BUILTIN_SPECS = {
    "sum-difference": "H(X+Y) - 3*H(X-Y) + H(X) + H(Y) <= 0",
    "subadditivity": "H(X+Y) - H(X) - H(Y) <= 0",
    "sum-lower-x": "H(X) - H(X+Y) <= 0",
    "sum-lower-y": "H(Y) - H(X+Y) <= 0",
    "doubling-upper": "H(X-X') + H(X) - 2*H(X+X') <= 0\niid: {X, X'}",
    "doubling-lower": "H(X+X') + H(X) - 2*H(X-X') <= 0\niid: {X, X'}",
}

_BUILTIN_RATIOS = {
    "doubling": ("H(X-X') - H(X)\niid: {X, X'}", "H(X+X') - H(X)\niid: {X, X'}"),
}

BUILTIN_SPEC_NAMES = tuple(sorted(_BUILTIN_SPECS))
BUILTIN_RATIO_NAMES = tuple(sorted(_BUILTIN_RATIOS))


def builtin_spec(name: str) -> InequalitySpec:
    try:
        return parse_spec(_BUILTIN_SPECS[name])
    except KeyError:
        raise KeyError(f"unknown builtin spec {name!r}; choose from {BUILTIN_SPEC_NAMES}") from None


def builtin_ratio(name: str) -> tuple[InequalitySpec, InequalitySpec]:
    try:
        num, den = _BUILTIN_RATIOS[name]
    except KeyError:
        raise KeyError(f"unknown builtin ratio {name!r}; choose from {BUILTIN_RATIO_NAMES}") from None
    return parse_form(num), parse_form(den)


def dilation_comparison_spec(p: int, q: int, log_base: float = 2.0) -> InequalitySpec:
    """H(pX+qY) - H(X+Y) <= c * (2H(X+Y) - H(X) - H(Y)) as a spec.

    The constant is c = 7*floor(log|p|) + 7*floor(log|q|) + 2 with the
    logarithm base configurable (base 2 by default).
    """
    p, q = int(p), int(q)
    if p == 0 or q == 0:
        raise ValueError("both dilation factors must be nonzero")
    if log_base <= 1.0:
        raise ValueError("log base must exceed 1")

    def _floor_log(v: int) -> int:
        if v == 1:
            return 0
        # guard against 3.999999 style rounding before flooring
        raw = math.log(v) / math.log(log_base)
        f = math.floor(raw + 1e-12)
        return int(f)

    c = 7 * _floor_log(abs(p)) + 7 * _floor_log(abs(q)) + 2
    return InequalitySpec(
        variables=("X", "Y"),
        alphas=(1.0, -(1.0 + 2.0 * c), float(c), float(c)),
        rows=((p, q), (1, 1), (1, 0), (0, 1)),
        iid_classes=(),
    )
