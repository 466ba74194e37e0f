"""Compare the compiled CDCL core with the pure-Python fallback.

    python benchmarks/bench_sat.py [--repeat N]

Workloads: pigeonhole instances (UNSAT, conflict heavy), random 3-SAT at
the phase transition, a bit-blasted multiplier commutativity check and
the deterministic UART loopback benchmark end to end.
"""

from __future__ import annotations

import argparse
import random
import statistics
import time

from coverif import bitvec as B
from coverif.harness.catalog import get
from coverif.harness.pipeline import ScenarioConfig, build_job, run_job
from coverif.sat import BACKENDS, CnfInstance, make_solver


def pigeonhole(backend, holes=7):
    s = make_solver(backend)
    p = {(i, j): s.new_var() for i in range(holes + 1) for j in range(holes)}
    for i in range(holes + 1):
        s.add_clause([p[i, j] for j in range(holes)])
    for j in range(holes):
        for a in range(holes + 1):
            for b in range(a + 1, holes + 1):
                s.add_clause([-p[a, j], -p[b, j]])
    assert s.solve([]) is False


def random_3sat(backend, n=120, ratio=4.26, instances=10, seed=3):
    rng = random.Random(seed)
    for _ in range(instances):
        s = make_solver(backend)
        for _ in range(n):
            s.new_var()
        for _ in range(int(n * ratio)):
            s.add_clause([rng.choice((-1, 1)) * rng.randint(1, n) for _ in range(3)])
        s.solve([])


def multiplier(backend, w=7):
    x, y = B.var("x", w), B.var("y", w)
    inst = CnfInstance(backend)
    assert not inst.check([B.ne(B.mul(x, y), B.mul(y, x))]).sat


def uart(backend):
    b = get("uart_loopback")
    out = run_job(build_job(b.design(), b.firmware(), ScenarioConfig(unwind=b.unwind, backend=backend)))
    assert out.verdict.safe


WORKLOADS = {"pigeonhole-7": pigeonhole, "random-3sat": random_3sat,
             "mul-commute-7": multiplier, "uart-loopback": uart}


def timed(fn, backend, repeat):
    ts = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(backend)
        ts.append(time.perf_counter() - t0)
    return statistics.median(ts)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    backends = [b for b in ("cython", "python") if b in BACKENDS]
    if "cython" not in backends:
        print("compiled core not built; only the Python fallback is timed")
    print(f"{'workload':16}" + "".join(f"{b:>12}" for b in backends) + ("     speedup" if len(backends) == 2 else ""))
    for name, fn in WORKLOADS.items():
        times = [timed(fn, b, args.repeat) for b in backends]
        row = f"{name:16}" + "".join(f"{t:11.3f}s" for t in times)
        if len(times) == 2:
            row += f"{times[1] / times[0]:11.1f}x"
        print(row, flush=True)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
