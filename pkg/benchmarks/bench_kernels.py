"""Timing comparison of the jitted kernels against their numpy originals.

Run from the repository root:

    python3 benchmarks/bench_kernels.py

The jitted path is what the simulator uses by default; the numpy path is
what you get with FTCONTROL_PURE_NUMPY=1.  Warm-up calls are excluded so
compilation time does not pollute the numbers.
"""

import time

import numpy as np

from ftcontrol.accel import NUMBA_ENABLED, python_impl
from ftcontrol.controller import belief_grad_kernel
from ftcontrol.gpr_camera import GprHyperParams, fit, gpr_eval_kernel
from ftcontrol.plant import arm_step_kernel
from ftcontrol.precision_learning import pl_step_kernel

REPEAT = 20000


def timeit(fn, args, repeat=REPEAT):
    fn(*args)  # warm-up / compile
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn(*args)
    return (time.perf_counter() - t0) / repeat


def bench(name, kernel, args):
    jitted = timeit(kernel, args)
    plain = timeit(python_impl(kernel), args)
    speedup = plain / jitted
    print(f"{name:22s} numba {jitted * 1e6:9.2f} us   numpy {plain * 1e6:9.2f} us"
          f"   speedup {speedup:6.1f}x")


def main():
    if not NUMBA_ENABLED:
        print("numba is disabled (FTCONTROL_PURE_NUMPY set); both columns "
              "will use the numpy path")
    rng = np.random.default_rng(0)

    q = rng.standard_normal(2)
    qd = rng.standard_normal(2)
    tau = rng.standard_normal(2)
    bench("arm_step_kernel", arm_step_kernel,
          (q, qd, tau, 1.0, 1.0, 1.0, 1.0, 0.1, 0.1, 0.0, 1e-3))

    grid = np.linspace(-1.2, 1.2, 20)
    X = np.array([[a, b] for a in grid for b in grid])
    Y = np.sin(X)
    model = fit(X, Y, GprHyperParams())
    bench("gpr_eval_kernel", gpr_eval_kernel,
          (model.X, model.dual, q, 0.25, 1.0), )

    mu = rng.standard_normal(2)
    mup = rng.standard_normal(2)
    muu = rng.standard_normal(2)
    y_q = rng.standard_normal(2)
    y_qd = rng.standard_normal(2)
    y_v = rng.standard_normal(2)
    g_v = rng.standard_normal(2)
    jac = rng.standard_normal((2, 2))
    xhat = rng.standard_normal(4)
    w2 = np.full(2, 1e4)
    bench("belief_grad_kernel", belief_grad_kernel,
          (mu, mup, muu, y_q, y_qd, y_v, g_v, jac, xhat,
           w2, np.full(2, 1e6), w2, np.full(4, 1.0), np.full(2, 1e-2),
           np.zeros(2), 25.0, 10.0))

    zeta = np.full(2, np.log(1e4))
    eps = rng.standard_normal(2) * 1e-3
    bench("pl_step_kernel", pl_step_kernel,
          (zeta, eps, 0.03, 1e-3, -20.0, 20.0))


if __name__ == "__main__":
    main()
