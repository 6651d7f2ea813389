"""Smoke test for the wave_observe extension module.

Build first, e.g. `maturin develop -m crates/python/Cargo.toml`, or copy
target/release/libwave_observe_py.so next to this file as wave_observe.so.
"""

import math
import sys

import wave_observe as wo


def close(a, b, tol):
    return abs(a - b) <= tol


def main():
    grid = wo.SpectralGrid(math.pi, 16)
    assert grid.n == 16
    assert close(grid.eigenvalues[2], 9.0, 1e-12)

    # free waves rotate each mode
    s = wo.linear_propagate(wo.State.mode(16, 3), 1.0, grid)
    assert close(s.u[2], math.cos(3.0), 1e-14)
    assert close(s.v[2], -3.0 * math.sin(3.0), 1e-13)

    # b = 1 over one period: Gramian = pi I
    one = wo.BumpFunction.constant(grid, 1.0)
    g = wo.assemble_gramian(grid, one, wo.TimeGrid(2 * math.pi, 2048), 0.0)
    assert g.dim == 32
    assert all(close(e, math.pi, 1e-8) for e in g.eigenvalues())

    window = wo.BumpFunction.from_window([(0.5, 1.5)], 0.2, grid)
    high = wo.assemble_gramian(grid, window, wo.TimeGrid(7.0, 1024), 0.6, n=4)
    assert high.is_observable() and high.lambda_min > 0

    assert close(wo.gcc_time([(0.5, 1.5)], math.pi), 2 * (math.pi - 1.5), 1e-3)
    assert wo.determining_threshold(10.0, 1.0, 1.0, wo.SpectralGrid(math.pi, 64)) == (3, False)

    # cubic energy is conserved to O(dt^2)
    f = wo.Nonlinearity.cubic()
    u0 = wo.State([0.3] + [0.0] * 15, [0.0] * 16)
    traj = wo.integrate(u0, grid, wo.TimeGrid(2.0, 2000), f)
    e0, e1 = wo.energy(traj[0], grid, f), wo.energy(traj[-1], grid, f)
    assert close(e0, e1, 1e-5 * e0)

    # truncated-window Gramian is singular: numerical error
    try:
        bad = wo.assemble_gramian(grid, window, wo.TimeGrid(0.05, 32), 0.0)
        assert not bad.is_observable()
    except wo.NumericalError:
        pass

    try:
        wo.SpectralGrid(-1.0, 4)
    except ValueError:
        pass
    else:
        raise AssertionError("negative length accepted")

    results = wo.run_suite(42)
    assert [r.name for r in results][0] == "semigroup_exactness"
    failed = [repr(r) for r in results if not r.verdict()]
    assert not failed, failed
    csv = wo.suite_csv(results)
    assert csv.startswith("experiment,check,value,threshold,bound,pass\n")
    print(f"smoke test ok: {len(results)} experiments pass")
    return 0


if __name__ == "__main__":
    sys.exit(main())
