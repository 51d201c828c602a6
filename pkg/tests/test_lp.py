import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from circuitmip import catalog
from circuitmip.formulation import ModelBuilder, build_model
from circuitmip.problem import presolve
from circuitmip.solver import LPError, solve_lp, solve_mip

BACKENDS = ["highs", "dense"]


def lp(c, rows, lb, ub, integer=False):
    b = ModelBuilder()
    ids = [b.add_var(f"x{i}", lo, hi, integer) for i, (lo, hi) in enumerate(zip(lb, ub))]
    for k, (coefs, sense, rhs) in enumerate(rows):
        b.add_row(ids, coefs, sense, rhs, f"r{k}")
    return b.build(c=c)


@pytest.mark.parametrize("backend", BACKENDS)
class TestSmallLPs:
    def test_half_point(self, backend):
        # max x subject to 2x <= 1 on [0, 1]
        res = solve_lp(lp([-1.0], [([2.0], "<", 1.0)], [0], [1]), backend=backend)
        assert res.status == "optimal" and res.objective == pytest.approx(-0.5)

    def test_infeasible(self, backend):
        res = solve_lp(lp([0, 0], [([1, 1], ">", 3)], [0, 0], [1, 1]), backend=backend)
        assert res.status == "infeasible"

    def test_equality_and_bounds(self, backend):
        # min x + 2y, x + y = 1.5, x <= 1
        res = solve_lp(lp([1, 2], [([1, 1], "=", 1.5)], [0, 0], [1, 1]), backend=backend)
        assert res.objective == pytest.approx(2.0)
        assert res.x == pytest.approx([1.0, 0.5])

    def test_beale_cycling_example(self, backend):
        # the classical degenerate LP on which textbook Dantzig pivoting cycles;
        # optimum -1/20 at (1/25, 0, 1, 0)
        model = lp(
            [-0.75, 150, -0.02, 6],
            [([0.25, -60, -0.04, 9], "<", 0), ([0.5, -90, -0.02, 3], "<", 0), ([0, 0, 1, 0], "<", 1)],
            [0] * 4,
            [np.inf] * 4,
        )
        res = solve_lp(model, backend=backend)
        assert res.status == "optimal" and res.objective == pytest.approx(-0.05)
        assert res.x == pytest.approx([0.04, 0, 1, 0], abs=1e-9)

    def test_overrides_fix_variables(self, backend):
        model = lp([-1, -1], [([1, 1], "<", 1.5)], [0, 0], [1, 1])
        res = solve_lp(model, {0: (0.0, 0.0)}, backend=backend)
        assert res.objective == pytest.approx(-1.0)
        assert solve_lp(model, {0: (1.0, 0.0)}, backend=backend).status == "infeasible"


def test_unknown_backend():
    with pytest.raises(ValueError):
        solve_lp(lp([1], [], [0], [1]), backend="glpk")


def test_lp_error_is_runtime_error():
    assert issubclass(LPError, RuntimeError)


small = st.integers(-4, 4).map(float)


@given(
    st.integers(2, 4).flatmap(
        lambda n: st.tuples(
            st.lists(small, min_size=n, max_size=n),
            st.lists(st.tuples(st.lists(small, min_size=n, max_size=n), st.sampled_from("<=>"), small), max_size=3),
        )
    )
)
def test_dense_matches_highs(data):
    c, rows = data
    n = len(c)
    model = lp(c, rows, [-1.0] * n, [2.0] * n)
    a, b = solve_lp(model, backend="highs"), solve_lp(model, backend="dense")
    assert a.status == b.status
    if a.status == "optimal":
        assert a.objective == pytest.approx(b.objective, abs=1e-7)
        assert model.max_violation(b.x) <= 1e-7


@pytest.mark.parametrize("name", ["cz_h_cnot12", "cnot21_h_cz", "swap_cnots", "magic_s_h_cnot21"])
def test_relaxation_below_integral_optimum(name):
    p = presolve(catalog.spec(name))
    best = catalog.EXPECTED[name]
    bounds = []
    for phase in p.phase_candidates:
        model = build_model(p, phase)
        res = solve_lp(model)
        if res.status == "infeasible":
            # an infeasible relaxation must mean no circuit exists at this phase
            assert solve_mip(model).status == "infeasible"
        else:
            bounds.append(res.objective)
    assert min(bounds) <= best + 1e-7
