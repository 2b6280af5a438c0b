"""Acceptance checks, one test per criterion.

Each test records a ``PASS``/``FAIL`` line; ``conftest.py`` prints all of
them at the end of the pytest run. ``python tests/test_acceptance.py`` runs
the same checks without pytest.
"""

from __future__ import annotations

import random
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

from convscale import zoo  # noqa: E402
from convscale.analyzer import profile  # noqa: E402
from convscale.document import deserialize, serialize  # noqa: E402
from convscale.interpreter import execute, reconcile  # noqa: E402
from convscale.ir import Conv, FullyConnected, NetworkSpec, Pooling, StageSpec, flatten, validate  # noqa: E402
from convscale.scaling import CompoundConfig, ScaleTriple, apply_scale, scale_compound  # noqa: E402
from convscale.search import SearchSpec, constant_evaluator, grid_search, peak_evaluator  # noqa: E402
from convscale.zoo.calibration import PUBLISHED_FAMILY  # noqa: E402
from strategies import random_spec  # noqa: E402

RESULTS: dict[int, str] = {}

SCALING_ROWS = [
    ("mobilenet-v1", (1, 1, 1), 0.6e9),
    ("mobilenet-v1", (1, 2, 1), 2.2e9),
    ("mobilenet-v1", (1, 1, 2), 2.2e9),
    ("mobilenet-v1", (1.4, 1.2, 1.3), 2.3e9),
    ("mobilenet-v2", (1, 1, 1), 0.3e9),
    ("mobilenet-v2", (4, 1, 1), 1.2e9),
    ("mobilenet-v2", (1, 2, 1), 1.1e9),
    ("mobilenet-v2", (1, 1, 2), 1.2e9),
    ("resnet-50", (4, 1, 1), 16.2e9),
    ("resnet-50", (1, 2, 1), 14.7e9),
    ("resnet-50", (1, 1, 2), 16.4e9),
]

B0_ROWS = [
    ((1, 1, 1), 0.4e9),
    ((4, 1, 1), 1.8e9),
    ((1, 2, 1), 1.8e9),
    ((1, 1, 2), 1.9e9),
    ((1.4, 1.2, 1.3), 1.8e9),
]


def _record(n: int, title: str, ok: bool, detail: str) -> None:
    RESULTS[n] = f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {title}: {detail}"
    print(RESULTS[n])


def _within(measured: float, target: float, tol: float) -> bool:
    return abs(measured / target - 1) <= tol


def _timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


def _scaled(name, triple):
    return apply_scale(zoo.get(name), ScaleTriple(*triple))


def _label(name, triple):
    if tuple(triple) == (1, 1, 1):
        return name
    return f"{name} d={triple[0]} w={triple[1]} r={triple[2]}"


def test_criterion_1_family_costs():
    def run():
        misses = []
        fam = zoo.efficientnet_family()
        for name in fam.names:
            rep = profile(fam.build(name))
            p, f = PUBLISHED_FAMILY[name]
            ptol, ftol = (0.02, 0.05) if name == "efficientnet-b0" else (0.03, 0.07)
            if not (_within(rep.total_params, p, ptol) and _within(rep.total_flops, f, ftol)):
                misses.append(f"{name} {rep.total_params / p - 1:+.1%}/{rep.total_flops / f - 1:+.1%}")
        rep = profile(zoo.resnet50())
        if not (_within(rep.total_params, 26e6, 0.02) and _within(rep.total_flops, 4.1e9, 0.05)):
            misses.append(f"resnet-50 {rep.total_params / 26e6 - 1:+.1%}/{rep.total_flops / 4.1e9 - 1:+.1%}")
        return misses

    misses, secs = _timed(run)
    ok = not misses and secs < 1.0
    detail = f"9 models, {secs:.2f}s" + (f"; out of tolerance: {', '.join(misses)}" if misses else "")
    _record(1, "B0-B7 and ResNet-50 params/FLOPS", ok, detail)
    assert ok, detail


def _row_check(rows, tol):
    misses, worst = [], 0.0
    for label, spec, target in rows:
        err = profile(spec).total_flops / target - 1
        worst = max(worst, abs(err))
        if abs(err) > tol:
            misses.append(f"{label} {err:+.1%}")
    return misses, worst


def test_criterion_2_single_dimension_scaling():
    def run():
        rows = [(_label(n, t), _scaled(n, t), target) for n, t, target in SCALING_ROWS]
        return _row_check(rows, 0.07)

    (misses, worst), secs = _timed(run)
    ok = not misses and secs < 1.0
    detail = f"{len(SCALING_ROWS) - len(misses)}/{len(SCALING_ROWS)} rows within 7%, {secs:.2f}s"
    if misses:
        detail += f"; off: {', '.join(misses)}"
    _record(2, "MobileNetV1/V2 and ResNet-50 scaled FLOPS", ok, detail)
    assert ok, detail


def test_criterion_3_b0_scaling():
    rows = [(_label("efficientnet-b0", t), _scaled("efficientnet-b0", t), target) for t, target in B0_ROWS]
    misses, _ = _row_check(rows, 0.07)
    ok = not misses
    detail = f"{len(rows) - len(misses)}/{len(rows)} rows within 7%"
    if misses:
        detail += f"; off: {', '.join(misses)}"
    _record(3, "B0 single-dimension and compound FLOPS", ok, detail)
    assert ok, detail


def test_criterion_4_oracle_equivalence():
    def run():
        specs = [zoo.get(n) for n in zoo.names()]
        specs += [_scaled(n, t) for n, t, _ in SCALING_ROWS]
        specs += [_scaled("efficientnet-b0", t) for t, _ in B0_ROWS]
        n_fixed = len(specs)
        rng = random.Random(20260414)
        specs += [random_spec(rng) for _ in range(40)]
        bad = []
        for s in specs:
            trace, rep = execute(s), profile(s)
            res = reconcile(trace, rep)
            totals = trace.total_macs == rep.total_flops and trace.total_params == rep.total_params
            if not (res.equal and totals):
                bad.append(f"{s.name}: {res}")
        return n_fixed, len(specs) - n_fixed, bad

    (n_fixed, n_random, bad), secs = _timed(run)
    ok = not bad and secs < 10.0
    detail = f"{n_fixed} zoo/scaled + {n_random} random specs exact, {secs:.2f}s"
    if bad:
        detail = f"{len(bad)} diverged, first {bad[0]}"
    _record(4, "analyzer equals interpreter", ok, detail)
    assert ok, detail


def test_criterion_5_compound_law():
    b0 = zoo.efficientnet_b0()
    base = profile(b0).total_flops
    cfg = CompoundConfig(1.2, 1.1, 1.15, constrained=True)
    parts, ok = [], True
    for phi in (1, 2, 3):
        ratio = profile(scale_compound(b0, cfg.with_phi(phi))).total_flops / base
        good = abs(ratio / 2**phi - 1) <= 0.15
        ok &= good
        parts.append(f"phi={phi} x{ratio:.2f} vs {2**phi} ({ratio / 2**phi - 1:+.0%}{'' if good else ' FAIL'})")
    detail = "; ".join(parts)
    _record(5, "compound FLOPS ratio within 15% of 2^phi", ok, detail)
    assert ok, detail


def regular_conv_fixture() -> NetworkSpec:
    """Three stride-1 Conv stages, equal channels throughout, input included."""
    c = 16
    stages = (
        StageSpec(Conv(3), 2, c, 1),
        StageSpec(Conv(1), 3, c, 1),
        StageSpec(Conv(5), 1, c, 1),
        StageSpec(Pooling(), 1, c, 1),
        StageSpec(FullyConnected(), 1, 10, 1),
    )
    return NetworkSpec("regular-conv", 32, c, stages, 10)


def _conv_flops(spec, skip_input_layer=False):
    rep = profile(spec)
    costs = [c for c in rep.per_layer if c.layer.op_name == "conv"]
    if skip_input_layer:
        costs = costs[1:]
    return sum(c.flops for c in costs)


def test_criterion_6_proportionality():
    base = regular_conv_fixture()
    f0 = _conv_flops(base)
    d2 = _conv_flops(apply_scale(base, ScaleTriple(d=2)))
    r2 = _conv_flops(apply_scale(base, ScaleTriple(r=2)))
    w2_spec = apply_scale(base, ScaleTriple(w=2))
    # the first conv reads the unscaled image channels, so it only doubles
    w2_body = _conv_flops(w2_spec, True) / _conv_flops(base, True)
    first = profile(base).per_layer[0].flops
    w2_bound = (2 * first + 4 * (f0 - first)) / f0
    w2_total = _conv_flops(w2_spec) / f0
    ok = d2 == 2 * f0 and r2 == 4 * f0 and w2_body == 4.0 and abs(w2_total - w2_bound) < 1e-12
    detail = (
        f"d=2 x{d2 / f0:g}, r=2 x{r2 / f0:g}, w=2 x{w2_body:g} past the input layer "
        f"(x{w2_total:.4f} overall, input-layer slack bound x{w2_bound:.4f})"
    )
    _record(6, "regular-conv proportionality", ok, detail)
    assert ok, detail


def test_criterion_7_search():
    def run():
        b0 = zoo.efficientnet_b0()
        s = SearchSpec()
        peak = grid_search(b0, s, peak_evaluator(b0))
        const = grid_search(b0, s, constant_evaluator())
        feasible = [
            (a, b, g) for a, b, g in s.grid() if abs(a * b * b * g * g - 2) <= s.constraint_tolerance + 1e-12
        ]
        par_peak = grid_search(b0, s, peak_evaluator(b0), workers=4)
        par_const = grid_search(b0, s, constant_evaluator(), workers=4)
        return peak, const, min(feasible), par_peak == peak and par_const == const

    (peak, const, lexmin, parallel_same), secs = _timed(run)
    ok = (
        peak.best.coefficients == (1.2, 1.1, 1.15)
        and const.best.coefficients == lexmin
        and parallel_same
        and secs < 5.0
    )
    detail = (
        f"peak -> {peak.best.coefficients}, constant -> {const.best.coefficients} (lexicographic min {lexmin}), "
        f"parallel==serial {parallel_same}, {secs:.2f}s for 4 searches"
    )
    _record(7, "search determinism and recovery", ok, detail)
    assert ok, detail


def _check_generated(spec: NetworkSpec, rng: random.Random) -> list[str]:
    problems = []
    if not validate(spec).ok:
        problems.append("generated spec invalid")
    text = serialize(spec)
    back = deserialize(text)
    if back != spec or serialize(back) != text:
        problems.append("round-trip")
    layers = flatten(spec)
    if len(layers) != sum(s.repeats for s in spec.stages):
        problems.append("layer count")
    for prev, cur in zip(layers, layers[1:]):
        if cur.in_channels != prev.out_channels or cur.in_resolution != prev.out_resolution:
            problems.append("chaining")
            break
    i = rng.randrange(len(spec.stages))
    stages = list(spec.stages)
    stages[i] = StageSpec(stages[i].operator, stages[i].repeats, stages[i].out_channels, 3)
    r = validate(spec.replace(stages=tuple(stages)))
    if not any(v.stage_index == i and v.rule == "stride must be 1 or 2" for v in r.violations):
        problems.append("mutation not flagged")
    return problems


def test_criterion_8_roundtrip_and_validation():
    def run():
        rng = random.Random(8)
        failures = []
        for k in range(1000):
            spec = random_spec(rng)
            for p in _check_generated(spec, rng):
                failures.append(f"#{k}: {p}")
        return failures

    failures, secs = _timed(run)
    ok = not failures and secs < 5.0
    detail = f"1000 specs, {len(failures)} failures, {secs:.2f}s"
    if failures:
        detail += f"; first {failures[0]}"
    _record(8, "round-trip and validation properties", ok, detail)
    assert ok, detail


if __name__ == "__main__":
    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_criterion_")]
    failed = 0
    for t in tests:
        try:
            t()
        except AssertionError:
            failed += 1
    print(f"{len(tests) - failed}/{len(tests)} criteria pass")
    raise SystemExit(1 if failed else 0)
