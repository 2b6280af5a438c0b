"""Grid search for compound coefficients, the accuracy/FLOPS objective, and
single-dimension vs compound sweeps.

Evaluators are plain callables ``(NetworkSpec) -> float``, higher is better,
deterministic per spec. With ``workers > 1`` they are called from a thread
pool, so they must be thread-safe; results never depend on ``workers``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

from convscale.analyzer import profile
from convscale.ir import NetworkSpec, ensure_valid
from convscale.rounding import DEFAULT_POLICY, RoundingPolicy
from convscale.scaling import (
    CompoundConfig,
    ScaleTriple,
    apply_scale,
    predicted_flops_ratio,
    triple_from_compound,
)

Evaluator = Callable[[NetworkSpec], float]

DEFAULT_FLOPS_TARGET = 400_000_000
DEFAULT_EXPONENT = -0.07
NO_FEASIBLE = "no feasible candidate"


def pareto_objective(
    score: float, flops: int, target: int = DEFAULT_FLOPS_TARGET, exponent: float = DEFAULT_EXPONENT
) -> float:
    """``score * (flops / target) ** exponent``."""
    if flops <= 0 or target <= 0:
        raise ValueError(f"flops and target must be positive, got flops={flops}, target={target}")
    return score * (flops / target) ** exponent


# ---------------------------------------------------------------------------
# Search configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GridRange:
    lo: float
    hi: float
    step: float

    def __post_init__(self) -> None:
        if self.lo < 1:
            raise ValueError(f"range lower bound must be >= 1, got {self.lo}")
        if self.lo > self.hi:
            raise ValueError(f"empty range: lo={self.lo} > hi={self.hi}")
        if not self.step > 0:
            raise ValueError(f"step must be positive, got {self.step}")

    def values(self) -> list[float]:
        n = math.floor((self.hi - self.lo) / self.step + 1e-9)
        return [round(self.lo + i * self.step, 10) for i in range(n + 1)]


@dataclass(frozen=True)
class SearchSpec:
    alpha_range: GridRange = GridRange(1.0, 2.0, 0.05)
    beta_range: GridRange = GridRange(1.0, 1.5, 0.05)
    gamma_range: GridRange = GridRange(1.0, 1.5, 0.05)
    constraint_tolerance: float = 0.1
    target_flops: Optional[int] = None
    target_memory_bytes: Optional[int] = None
    phi_for_eval: float = 1.0

    def __post_init__(self) -> None:
        for name in ("alpha_range", "beta_range", "gamma_range"):
            value = getattr(self, name)
            if not isinstance(value, GridRange):
                object.__setattr__(self, name, GridRange(*value))
        if not self.constraint_tolerance > 0:
            raise ValueError("constraint_tolerance must be positive")

    def grid(self) -> list[tuple[float, float, float]]:
        """All grid triples in lexicographic order."""
        return [
            (a, b, g)
            for a in self.alpha_range.values()
            for b in self.beta_range.values()
            for g in self.gamma_range.values()
        ]

    @classmethod
    def from_dict(cls, doc: dict) -> "SearchSpec":
        known = {"alpha", "beta", "gamma", "constraint_tolerance", "target_flops", "target_memory_bytes", "phi", "base"}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown search config field {sorted(unknown)[0]!r}")
        defaults = cls()
        kwargs = {}
        for key, attr in (("alpha", "alpha_range"), ("beta", "beta_range"), ("gamma", "gamma_range")):
            if key in doc:
                lo, hi, step = doc[key]
                kwargs[attr] = GridRange(lo, hi, step)
        kwargs["constraint_tolerance"] = doc.get("constraint_tolerance", defaults.constraint_tolerance)
        kwargs["target_flops"] = doc.get("target_flops")
        kwargs["target_memory_bytes"] = doc.get("target_memory_bytes")
        kwargs["phi_for_eval"] = doc.get("phi", defaults.phi_for_eval)
        return cls(**kwargs)


@dataclass(frozen=True)
class Candidate:
    config: CompoundConfig
    score: float
    flops: int
    params: int
    memory_bytes: int


@dataclass(frozen=True)
class SearchResult:
    best: Optional[CompoundConfig]
    best_score: Optional[float]
    candidates_evaluated: int
    pareto: tuple[Candidate, ...] = field(default_factory=tuple)
    candidates: tuple[Candidate, ...] = field(default_factory=tuple)
    status: str = "ok"

    @property
    def feasible(self) -> bool:
        return self.best is not None

    def to_document(self) -> str:
        def cdoc(c: Candidate) -> dict:
            return {
                "alpha": c.config.alpha,
                "beta": c.config.beta,
                "gamma": c.config.gamma,
                "score": c.score,
                "flops": c.flops,
                "params": c.params,
            }

        doc = {
            "status": self.status,
            "best": None if self.best is None else dict(zip(("alpha", "beta", "gamma"), self.best.coefficients)),
            "best_score": self.best_score,
            "candidates_evaluated": self.candidates_evaluated,
            "pareto": [cdoc(c) for c in self.pareto],
        }
        return json.dumps(doc, indent=2) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["alpha", "beta", "gamma", "score", "flops", "params", "memory_bytes", "pareto"])
        front = {c.config.coefficients for c in self.pareto}
        for c in self.candidates:
            w.writerow([*c.config.coefficients, repr(c.score), c.flops, c.params, c.memory_bytes,
                        int(c.config.coefficients in front)])
        return buf.getvalue()


def _pareto_front(cands: Sequence[Candidate]) -> tuple[Candidate, ...]:
    # maximise score, minimise flops
    front = []
    for c in cands:
        dominated = any(
            o.score >= c.score and o.flops <= c.flops and (o.score > c.score or o.flops < c.flops) for o in cands
        )
        if not dominated:
            front.append(c)
    return tuple(front)


def grid_search(
    base: NetworkSpec,
    s: SearchSpec,
    evaluator: Evaluator,
    policy: RoundingPolicy = DEFAULT_POLICY,
    workers: int = 1,
) -> SearchResult:
    """Enumerate the grid, keep constrained and in-budget triples, return the argmax.

    Ties in score go to the lexicographically smallest ``(alpha, beta, gamma)``.
    An empty feasible set yields ``best=None`` and ``status == NO_FEASIBLE``.
    """
    ensure_valid(base)
    grid = s.grid()
    if not grid:
        raise ValueError("search grid is empty")

    survivors: list[tuple[CompoundConfig, NetworkSpec, int, int, int]] = []
    for a, b, g in grid:
        cfg = CompoundConfig(a, b, g, s.phi_for_eval, s.constraint_tolerance)
        if not cfg.satisfies_constraint():
            continue
        scaled = apply_scale(base, triple_from_compound(cfg), policy)
        report = profile(scaled)
        if s.target_flops is not None and report.total_flops > s.target_flops:
            continue
        if s.target_memory_bytes is not None and report.memory_estimate_bytes > s.target_memory_bytes:
            continue
        survivors.append((cfg, scaled, report.total_flops, report.total_params, report.memory_estimate_bytes))

    if not survivors:
        return SearchResult(None, None, 0, status=NO_FEASIBLE)

    specs = [sv[1] for sv in survivors]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            scores = list(pool.map(evaluator, specs))
    else:
        scores = [evaluator(sp) for sp in specs]

    cands = tuple(Candidate(cfg, float(sc), fl, pa, me) for (cfg, _, fl, pa, me), sc in zip(survivors, scores))
    best = cands[0]
    for c in cands[1:]:
        if c.score > best.score:
            best = c
    return SearchResult(best.config, best.score, len(cands), _pareto_front(cands), cands)


# ---------------------------------------------------------------------------
# Evaluators
# ---------------------------------------------------------------------------


def constant_evaluator(value: float = 1.0) -> Evaluator:
    return lambda spec: value


def _features(spec: NetworkSpec) -> list[float]:
    feats = [float(spec.input_resolution)]
    for st in spec.stages:
        feats += [float(st.repeats), float(st.out_channels)]
    return feats


def peak_evaluator(
    base: NetworkSpec,
    peak: Sequence[float] = (1.2, 1.1, 1.15),
    phi: float = 1.0,
    policy: RoundingPolicy = DEFAULT_POLICY,
) -> Evaluator:
    """Synthetic stand-in for accuracy, maximal (0) at the spec that ``peak`` produces.

    Score is minus the squared log-distance between per-stage repeats,
    channels and input resolution of the candidate and of the peak spec.
    """
    alpha, beta, gamma = peak
    target = _features(apply_scale(base, triple_from_compound(CompoundConfig(alpha, beta, gamma, phi)), policy))

    def evaluate(spec: NetworkSpec) -> float:
        feats = _features(spec)
        if len(feats) != len(target):
            return -math.inf
        return 0.0 - sum(math.log(f / t) ** 2 for f, t in zip(feats, target))

    return evaluate


def flops_objective_evaluator(
    accuracy: Optional[Evaluator] = None, target: int = DEFAULT_FLOPS_TARGET, exponent: float = DEFAULT_EXPONENT
) -> Evaluator:
    """Wrap an accuracy proxy (default: constant 1) in :func:`pareto_objective`."""
    accuracy = accuracy or constant_evaluator(1.0)
    return lambda spec: pareto_objective(accuracy(spec), profile(spec).total_flops, target, exponent)


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepRow:
    method: str
    d: float
    w: float
    r: float
    input_resolution: int
    params: int
    flops: int
    score: Optional[float] = None
    coefficients: Optional[tuple[float, float, float, float]] = None


SWEEP_COLUMNS = ("method", "d", "w", "r", "alpha", "beta", "gamma", "phi", "input_resolution", "params", "flops", "score")


def _row(method, base, triple, policy, evaluator, coefficients=None) -> SweepRow:
    spec = apply_scale(base, triple, policy)
    rep = profile(spec)
    score = evaluator(spec) if evaluator is not None else None
    return SweepRow(method, triple.d, triple.w, triple.r, spec.input_resolution, rep.total_params, rep.total_flops,
                    score, coefficients)


def sweep_families(
    base: NetworkSpec,
    configs: Iterable[CompoundConfig],
    flops_ratios: Sequence[float] = (2.0, 4.0, 8.0),
    evaluator: Optional[Evaluator] = None,
    policy: RoundingPolicy = DEFAULT_POLICY,
) -> list[SweepRow]:
    """Baseline row, single-dimension rows and one compound row per config.

    Single-dimension rows are emitted for every ratio in ``flops_ratios`` and
    for every config's predicted FLOPS ratio: depth-only uses ``d = ratio``,
    width-only and resolution-only use ``sqrt(ratio)``.
    """
    configs = list(configs)
    ratios: list[float] = []
    for ratio in list(flops_ratios) + [predicted_flops_ratio(c) for c in configs]:
        if all(abs(ratio - r) > 1e-9 for r in ratios):
            ratios.append(ratio)
    rows = [_row("baseline", base, ScaleTriple(), policy, evaluator)]
    for ratio in ratios:
        root = math.sqrt(ratio)
        rows.append(_row("depth", base, ScaleTriple(d=ratio), policy, evaluator))
        rows.append(_row("width", base, ScaleTriple(w=root), policy, evaluator))
        rows.append(_row("resolution", base, ScaleTriple(r=root), policy, evaluator))
    for cfg in configs:
        rows.append(_row("compound", base, triple_from_compound(cfg), policy, evaluator,
                         (cfg.alpha, cfg.beta, cfg.gamma, cfg.phi)))
    return rows


def sweep_to_csv(rows: Sequence[SweepRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for r in rows:
        coeffs = r.coefficients or ("", "", "", "")
        w.writerow([r.method, repr(r.d), repr(r.w), repr(r.r), *coeffs, r.input_resolution, r.params, r.flops,
                    "" if r.score is None else repr(r.score)])
    return buf.getvalue()


def sweep_to_document(rows: Sequence[SweepRow]) -> str:
    out = []
    for r in rows:
        d = {"method": r.method, "d": r.d, "w": r.w, "r": r.r, "input_resolution": r.input_resolution,
             "params": r.params, "flops": r.flops, "score": r.score}
        if r.coefficients:
            d.update(zip(("alpha", "beta", "gamma", "phi"), r.coefficients))
        out.append(d)
    return json.dumps({"rows": out}, indent=2) + "\n"
