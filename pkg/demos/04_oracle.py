"""Run the reference interpreter and reconcile it with the analyzer."""

import dataclasses

from convscale import zoo
from convscale.analyzer import profile
from convscale.interpreter import TensorShape, execute, reconcile

b0 = zoo.efficientnet_b0()
trace = execute(b0)
print("before head:", trace.shape_before("head"), " logits:", trace.output)
print("at 448:", execute(b0, TensorShape(448, 448, 3)).shape_before("head"))
print("reconcile:", reconcile(trace, profile(b0)))

# Tamper with one analyzer entry and watch the first divergence get reported.
rep = profile(b0)
costs = list(rep.per_layer)
costs[7] = dataclasses.replace(costs[7], params=costs[7].params + 8)
print("tampered:", reconcile(trace, dataclasses.replace(rep, per_layer=tuple(costs))))
