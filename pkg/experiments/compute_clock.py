import time

from herglotz import build_scenario, simulate
from herglotz.entities import Route

scenario = build_scenario("affine", {"q": 2.0, "gamma": 0.1})

start = time.time()
result = simulate(scenario=scenario, route=Route.compare, t_end=2.0, dt=1e-3)
elapsed = time.time() - start
print(f"Compare run took {elapsed:.2f} s (max deviation {result.summary['max_deviation']:.3e})")
