"""Grid search for (alpha, beta, gamma) with pluggable evaluators."""

import time

from convscale import zoo
from convscale.search import (
    SearchSpec,
    constant_evaluator,
    flops_objective_evaluator,
    grid_search,
    peak_evaluator,
)

b0 = zoo.efficientnet_b0()
spec = SearchSpec()

t0 = time.perf_counter()
res = grid_search(b0, spec, peak_evaluator(b0), workers=4)
print(f"peak evaluator -> {res.best.coefficients} from {res.candidates_evaluated} feasible, "
      f"{time.perf_counter() - t0:.2f}s")

print("constant evaluator ->", grid_search(b0, spec, constant_evaluator()).best.coefficients)

budget = SearchSpec(target_flops=900_000_000)
res = grid_search(b0, budget, flops_objective_evaluator())
print("FLOPS-penalised under 0.9B ->", res.best.coefficients, f"({len(res.pareto)} on the pareto front)")

print("impossible budget ->", grid_search(b0, SearchSpec(target_flops=10**8), constant_evaluator()).status)
