"""Smoke test for the lanczos_descent extension module.

Build first:  pip install --no-build-isolation -e crates/python
"""

import math
import tempfile
from pathlib import Path

import numpy as np

import lanczos_descent as ld

REPO = Path(__file__).resolve().parent.parent


def check_problem_and_hvp():
    p = ld.Problem("quartic_sum", dim=6, components=2)
    x = [0.3, -0.2, 0.5, 1.0, -1.5, 0.1]
    v = [1.0, 0.0, 2.0, 0.0, -1.0, 0.5]
    exact = np.array(p.hvp(0, x, v, mode="exact"))
    fd = np.array(p.hvp(0, x, v, mode="fd"))
    assert np.linalg.norm(fd - exact) <= 1e-4 * np.linalg.norm(exact)
    g = np.array(p.full_gradient(x))
    assert np.allclose(g, np.array(p.gradient(0, x)) + np.array(p.gradient(1, x)))
    try:
        ld.Problem("quartic_sum", not_a_field=1)
    except ValueError:
        pass
    else:
        raise AssertionError("unknown option accepted")


def check_directions():
    # Newton direction with a full Krylov space matches a dense solve.
    p = ld.Problem("indefinite_quadratic", eigenvalues=[2.0, -1.0, 0.5])
    x = [1.0, 0.5, -2.0]
    fact = p.lanczos(0, x, 3, mode="exact")
    dirs = fact.directions()
    h = np.diag([2.0, -1.0, 0.5])
    assert np.allclose(dirs["s"], -np.linalg.solve(h, h @ x))
    assert dirs["mu"] < 0 and math.isclose(np.linalg.norm(dirs["d"]), 1.0)
    assert np.allclose(sorted(fact.ritz_values()), [-1.0, 0.5, 2.0])


def check_saddle_escape():
    p = ld.Problem("indefinite_quadratic", eigenvalues=[1.0, -1.0])
    lnnc = ld.run(p, "lnnc", k_max=20, q=2, x0=[1.0, 1e-6])
    sgd = ld.run(p, "sgd_constant", alpha=0.1, k_max=100, x0=[1.0, 1e-6])
    assert lnnc.final_full_f <= -10.0
    assert sgd.final_full_f >= -1e-3
    trace = lnnc.trace()
    assert len(trace) == 20 and trace[0]["k"] == 0
    assert lnnc.trace_csv().startswith("k,j,")


def check_experiment_round_trip():
    with tempfile.TemporaryDirectory() as out:
        exp = ld.Experiment.load(
            str(REPO / "configs" / "saddle.conf"), [f"--output.dir={out}", "--run.k_max=10"]
        )
        assert ld.Experiment.parse(exp.render()).render() == exp.render()
        result = exp.run_matrix()
        assert Path(result["plot"]).is_file()
        for run in result["runs"]:
            matches, first = ld.replay(run["manifest"])
            assert matches, first
            assert len(ld.read_trace(run["trace"])) == 10
        print(result["report"])


if __name__ == "__main__":
    for check in (check_problem_and_hvp, check_directions, check_saddle_escape, check_experiment_round_trip):
        check()
        print(f"ok  {check.__name__}")
