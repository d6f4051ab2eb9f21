"""Experiment sweeps: one CSV row per (y, t, check), sorted, schema-versioned.

A row's ``status`` is one of

* ``ok``                         the asserted inequality held
* ``violation``                  an asserted inequality failed (exit code 1)
* ``not-applicable``             hypotheses not met, nothing asserted
* ``hypothesis-violated``        set bound computed with mu(x_1 = 0) != 1/2
* ``expected-nonconcentration``  independent-case tail bound fails for a
                                 dependent law, which is a finding, not an error
* ``info``                       informational row (counts, alpha values)
"""
from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

import numpy as np

from . import hamming as hm
from . import sets as st
from .cube import ALPHA_EXACT_MAX_N, CapacityError, CubePoint, InvalidParameter, NotApplicable, capacity
from .dist import (
    CubeDistribution,
    load,
    make_delta_mix,
    make_dense,
    make_markov,
    make_product,
    make_random_dense,
    make_random_markov,
    make_random_product,
    make_uniform,
)
from .montecarlo import RNG_NAME, make_rng

log = logging.getLogger(__name__)

SCHEMA = 1
CHECKS = ("inductive", "smallvar", "pc", "count", "set", "alpha", "tail", "talagrand")
COLUMNS = (
    "n", "kind", "seed", "check", "y", "t", "c", "eps", "set",
    "mean", "mgf", "bound_inductive", "bound_smallvar", "bound_hoeffding",
    "slack_inductive", "slack_smallvar", "verdicts",
    "lhs", "rhs", "mid", "outer", "mu_A", "c_prod",
    "alpha", "count", "formula", "hypotheses", "pass", "status",
)


def parse_grid(text: str) -> list:
    """'a:b:step' (inclusive of b), 'a,b,c', or a single number."""
    text = str(text).strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise InvalidParameter(f"grid must be start:stop:step, got {text!r}")
        a, b, step = (float(v) for v in parts)
        if step <= 0:
            raise InvalidParameter("grid step must be positive")
        count = int(math.floor((b - a) / step + 1e-9)) + 1
        return [round(a + i * step, 12) for i in range(max(count, 0))]
    return [float(v) for v in text.split(",") if v.strip()]


def select_y(n: int, spec: str, seed: int) -> list:
    """'all', 'sample:K', or comma-separated bit-strings."""
    spec = str(spec).strip()
    if spec == "all":
        return [CubePoint(n, i) for i in range(1 << n)]
    if spec.startswith("sample:"):
        k = int(spec.split(":", 1)[1])
        rng = make_rng([seed, 1])
        k = min(k, 1 << n)
        picks = rng.choice(1 << n, size=k, replace=False) if n <= 30 else rng.integers(0, 1 << n, size=k)
        return [CubePoint(n, int(i)) for i in sorted(set(int(v) for v in picks))]
    pts = [CubePoint.from_bits(s) for s in spec.split(",") if s.strip()]
    for p in pts:
        if p.n != n:
            raise InvalidParameter(f"y={p} has length {p.n}, distribution has n={n}")
    return pts


def build_distribution(source: dict, seed: int = 0) -> CubeDistribution:
    """Resolve a distribution from ``{"path": ...}`` or a generator description.

    Generator keys: kind, n, and per kind: product ``p0`` (list, or "random";
    uniform when absent), markov ``initial_p0`` / ``transitions`` (random rows
    from the seed when absent), delta_mix ``eps``, dense ``probs`` (random
    simplex draw from the seed when absent).
    """
    if source.get("path"):
        return load(source["path"])
    kind = source.get("kind")
    n = source.get("n")
    seed = source.get("seed", seed)
    if kind == "product":
        p0 = source.get("p0")
        if p0 is None:
            return make_uniform(int(n))
        if p0 == "random":
            return make_random_product(int(n), seed)
        return make_product(p0)
    if kind == "markov":
        if source.get("transitions") is None:
            return make_random_markov(int(n), seed, source.get("initial_p0", 0.5))
        return make_markov(source.get("initial_p0", 0.5), source["transitions"])
    if kind == "delta_mix":
        return make_delta_mix(int(n), float(source.get("eps", 0.0)))
    if kind == "dense":
        if source.get("probs") is not None:
            return make_dense(source["probs"])
        return make_random_dense(int(n), seed)
    raise InvalidParameter(f"unknown or missing distribution kind {kind!r}")


@dataclass
class SweepSpec:
    dist: dict
    y: str = "all"
    t: str = "0.25:2:0.25"
    checks: list = field(default_factory=lambda: ["inductive"])
    seed: int = 0
    out: Optional[str] = None
    c: Optional[str] = None  # tail deviations; n/2 when None
    enlarge: Optional[str] = None  # alpha radii; 0..n when None
    sets: int = 4
    complement: bool = False

    def __post_init__(self):
        if isinstance(self.checks, str):
            self.checks = [c.strip() for c in self.checks.split(",") if c.strip()]
        bad = [c for c in self.checks if c not in CHECKS]
        if bad or not self.checks:
            raise InvalidParameter(f"unknown checks {bad}; choose from {', '.join(CHECKS)}")
        grid = parse_grid(self.t)
        if not grid or any(not v > 0 for v in grid):
            raise InvalidParameter(f"t grid must be nonempty and strictly positive, got {self.t!r}")

    @classmethod
    def from_json(cls, data: dict) -> "SweepSpec":
        return cls(**data)

    @property
    def t_grid(self) -> list:
        return parse_grid(self.t)


@dataclass
class SweepResult:
    rows: list
    exit_code: int
    header: str
    path: Optional[str] = None

    @property
    def violations(self) -> list:
        return [r for r in self.rows if r["status"] == "violation"]


def _status(passed: bool, applicable: bool = True) -> str:
    if not applicable:
        return "not-applicable"
    return "ok" if passed else "violation"


class _Rows:
    def __init__(self, mu, spec):
        self.mu = mu
        self.base = {"n": mu.n, "kind": mu.kind, "seed": spec.seed}
        self.rows = []

    def add(self, check, **values):
        row = dict(self.base, check=check)
        row.update(values)
        self.rows.append(row)


def _run_check(name: str, mu: CubeDistribution, ys: list, spec: SweepSpec, out: _Rows) -> None:
    n = mu.n
    ts = spec.t_grid
    if name == "inductive":
        for y in ys:
            for t in ts:
                ledger, rep = hm.inductive_bound(mu, y, t)
                mgf = hm.centered_mgf(mu, y, t)
                out.add(name, y=str(y), t=t, mean=mgf.mean, mgf=rep.lhs, bound_inductive=rep.bound,
                        bound_hoeffding=hm.hoeffding_mgf_bound(n, t), slack_inductive=rep.slack,
                        **{"pass": rep.passed, "status": _status(rep.passed)})
    elif name == "smallvar":
        for y in ys:
            for t in ts:
                sv, rep = hm.small_variance_bound(mu, y, t)
                out.add(name, y=str(y), t=t, mgf=rep.lhs, mid=sv.middle, bound_smallvar=sv.value,
                        bound_hoeffding=hm.hoeffding_mgf_bound(n, t), slack_smallvar=rep.slack,
                        **{"pass": rep.passed, "status": _status(rep.passed)})
    elif name == "pc":
        for y in ys:
            for t in ts:
                rep = hm.pc_theorem_check(mu, y, t)
                held = rep.slack >= -hm.REL_TOL
                out.add(name, y=str(y), t=t, mgf=rep.lhs, bound_hoeffding=rep.bound, verdicts=rep.note,
                        **{"pass": held, "status": _status(rep.passed, rep.applicable)})
    elif name == "count":
        for t in ts:
            rep = hm.count_good_y(mu, t)
            hyp = f"marginals={int(rep.marginals_half)};t2={int(rep.hypotheses_hold)};" \
                  f"t2half={int(rep.hypotheses_hold_half)};degenerate={int(rep.degenerate)}"
            out.add(name, y="all", t=t, count=rep.count, formula=rep.formula, hypotheses=hyp,
                    **{"pass": rep.formula_met, "status": "info"})
    elif name == "tail":
        cs = parse_grid(spec.c) if spec.c else [n / 2]
        for y in ys:
            for c in cs:
                tb = hm.tail_bound(mu, y, c)
                if mu.is_product:
                    status = _status(tb.holds)
                else:
                    status = "ok" if tb.holds else "expected-nonconcentration"
                out.add(name, y=str(y), c=c, mean=hm.mean_hamming(mu, y), lhs=tb.exact_tail,
                        rhs=tb.hoeffding_tail, bound_hoeffding=tb.hoeffding_tail,
                        **{"pass": tb.holds, "status": status})
    elif name in ("set", "talagrand"):
        rng = make_rng([spec.seed, 2])
        sets = [st.CubeSet.random(n, rng) for _ in range(spec.sets)]
        for A in sets:
            for t in ts:
                if name == "set":
                    b = st.lipschitz_set_bound(mu, A, t)
                    held = b.passed if b.hypothesis_ok else (
                        hm.rel_slack(b.lhs, b.mid) >= -hm.REL_TOL and hm.rel_slack(b.mid, b.outer) >= -hm.REL_TOL)
                    status = _status(b.passed) if b.hypothesis_ok else "hypothesis-violated"
                    out.add(name, y="-", t=t, set=A.to_hex(), lhs=b.lhs, mid=b.mid, outer=b.outer,
                            mu_A=b.mu_A, c_prod=b.c_prod, **{"pass": held, "status": status})
                else:
                    try:
                        tc = st.talagrand_product_baseline(mu, A, t)
                    except NotApplicable:
                        out.add(name, y="-", t=t, set=A.to_hex(), **{"pass": "", "status": "not-applicable"})
                        continue
                    out.add(name, y="-", t=t, set=A.to_hex(), lhs=tc.lhs, rhs=tc.bound, mu_A=A.measure(mu),
                            **{"pass": tc.holds, "status": _status(tc.holds)})
    elif name == "alpha":
        radii = [int(v) for v in parse_grid(spec.enlarge)] if spec.enlarge else list(range(n + 1))
        exact = n <= capacity(ALPHA_EXACT_MAX_N)
        for eps in radii:
            if exact:
                alpha = st.concentration_alpha(mu, eps)
                for y in ys:
                    mc = st.median_concentration_check(mu, y, eps)
                    out.add(name, y=str(y), eps=eps, alpha=alpha, lhs=mc.lhs, rhs=mc.rhs,
                            **{"pass": mc.holds, "status": _status(mc.holds)})
            else:
                lb = st.alpha_lower_bound(mu, eps)
                out.add(name, y="-", eps=eps, alpha=lb, **{"pass": "", "status": "info:alpha_lower_bound"})
    else:  # pragma: no cover - guarded by SweepSpec
        raise InvalidParameter(name)


def _fmt(v) -> str:
    if v is None or v == "":
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _sort_key(row: dict):
    def num(k):
        v = row.get(k)
        return -math.inf if v in (None, "") else float(v)
    return (row.get("y", ""), num("t"), row["check"], num("c"), num("eps"), row.get("set", ""))


def header_line() -> str:
    stamp = datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
    return f"# cubeconc schema={SCHEMA} rng={RNG_NAME} generated={stamp}"


def render_csv(rows: list, header: str) -> str:
    buf = io.StringIO()
    buf.write(header + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for row in rows:
        writer.writerow([_fmt(row.get(col)) for col in COLUMNS])
    return buf.getvalue()


def run_sweep(spec: SweepSpec, mu: Optional[CubeDistribution] = None) -> SweepResult:
    """Run every requested check; write the CSV when ``spec.out`` is set.

    Exit code is 1 iff some asserted inequality failed beyond tolerance.
    """
    if mu is None:
        mu = build_distribution(spec.dist, spec.seed)
    ys = select_y(mu.n, spec.y, spec.seed)
    if spec.complement:
        ys = sorted(set(ys) | {y.complement() for y in ys})
    if "set" in spec.checks:
        c = st.conditional_sup_bounds(mu)
        if any(b > a for a, b in zip(c, c[1:])):
            log.warning("conditional sup-bounds c_k are not non-increasing: %s", ", ".join(f"{v:.4g}" for v in c))
    out = _Rows(mu, spec)
    for name in spec.checks:
        try:
            _run_check(name, mu, ys, spec, out)
        except CapacityError as exc:
            raise CapacityError(f"check '{name}': {exc}") from None
    rows = sorted(out.rows, key=_sort_key)
    header = header_line()
    result = SweepResult(rows, 1 if any(r["status"] == "violation" for r in rows) else 0, header)
    if spec.out:
        Path(spec.out).write_text(render_csv(rows, header))
        result.path = spec.out
    return result


def load_spec(path) -> SweepSpec:
    return SweepSpec.from_json(json.loads(Path(path).read_text()))


def spec_to_json(spec: SweepSpec) -> str:
    return json.dumps(asdict(spec), indent=2)
