import pytest

from encoding.stl_encoder import encode_formula
from formula.ast import Not
from formula.transforms import normalize
from milp.model import ObjectiveSense, Sense
from milp.solution import SolveStatus, bind_solution
from milp.solve import solve
from monitor.boolean import sat
from monitor.valuation import valuation_violations
from synthesis.driver import decode_trace, validation_tolerance
from utilities.config import EncodingConfig
from utilities.exceptions import EncodingError

BOX = {"x": (-10.0, 10.0), "y": (-10.0, 10.0)}


def encode(f, text, n=3, horizon=10.0, config=None, variables=None, params=None):
    phi = normalize(f(text, params))
    config = config or EncodingConfig(delta=0.1, epsilon=1e-4, beta=8)
    return phi, encode_formula(phi, n, horizon, config, variables or BOX, params)


def test_time_sequence_is_pinned_to_the_horizon(f):
    _, ctx = encode(f, "F[0, 5] x >= 3")
    first, last = ctx.model.vars["g_0"], ctx.model.vars["g_3"]
    assert (first.lower, first.upper) == (0.0, 0.0)
    assert (last.lower, last.upper) == (10.0, 10.0)
    rows = {c.name: c for c in ctx.model.constraints}
    for i in (1, 2, 3):
        assert rows[f"time_{i}"].terms == {f"g_{i}": 1.0, f"g_{i - 1}": -1.0}
        assert rows[f"time_{i}"].rhs == pytest.approx(1e-4)


def test_variable_families_have_the_expected_sizes(f):
    _, ctx = encode(f, "F[0, 5] x >= 3")
    sizes = ctx.registry.sizes()
    assert sizes["gamma"] == 4
    assert sizes["theta"] == 2 * 3
    assert sizes["state"] == 2 * 4
    assert sizes["zeta"] == sizes["zeta_delta"] == 4
    assert sizes["P"] == 4
    assert sizes["S"] == 0
    assert sizes["params"] == 0


def test_fulfil_row_targets_the_root_on_the_first_interval(f):
    phi, ctx = encode(f, "F[0, 5] x >= 3")
    fulfil = next(c for c in ctx.model.constraints if c.name == "fulfil")
    assert fulfil.terms == {ctx.theta(phi, 1).name: 1.0}
    assert fulfil.sense is Sense.EQ
    assert fulfil.rhs == 1.0


def test_atom_rows_use_delta_and_epsilon_margins(f):
    _, ctx = encode(f, "x >= 3")
    rows = {c.name: c for c in ctx.model.conditionals}
    assert rows["atom_0_0_t"].guard == "z_0_0"
    assert rows["atom_0_0_t"].body.terms == {"x_0_x": 1.0}
    assert rows["atom_0_0_t"].body.rhs == pytest.approx(3.0)
    assert rows["atom_0_0_f"].guard_value == 0
    assert rows["atom_0_0_f"].body.rhs == pytest.approx(3.0 - 1e-4)
    assert rows["atom_0_2_dt"].body.rhs == pytest.approx(3.1)
    assert rows["atom_0_2_df"].body.rhs == pytest.approx(3.1 - 1e-4)


def test_symbol_map_names_the_encoding_variables(f):
    _, ctx = encode(f, "G[0, 2] y <= 1")
    symbols = ctx.registry.symbol_map()
    assert symbols["g_0"] == "γ_0"
    assert symbols["x_2_y"] == "x_{2,y}"
    assert symbols["S_1_0"] == "S^ψ1_0"
    assert "ζ^p0_1" in symbols["z_0_1"]


def test_unbounded_operators_need_no_accumulators(f):
    _, ctx = encode(f, "F G x >= 1 && (x >= 0 U y >= 2)")
    sizes = ctx.registry.sizes()
    assert sizes["S"] == sizes["P"] == 0
    names = {c.name for c in ctx.model.constraints}
    assert any(name.startswith("unb_") for name in names)


def test_slack_objective_maximizes_atom_slacks(f):
    config = EncodingConfig(delta=0.1, epsilon=1e-4, beta=8, slack_objective=True)
    _, ctx = encode(f, "x >= 3", n=2, config=config)
    assert ctx.model.objective.sense is ObjectiveSense.MAXIMIZE
    assert set(ctx.model.objective.terms) == {"slack_0_0", "slack_0_1", "slack_0_2"}


def test_parameters_become_bounded_variables(f):
    _, ctx = encode(f, "F[0, 5] x >= p", params={"p": (0.0, 20.0)})
    p = ctx.model.vars["p_p"]
    assert (p.lower, p.upper) == (0.0, 20.0)
    assert ctx.registry.symbols["p_p"] == "parameter p"


@pytest.mark.parametrize(
    "kwargs, message",
    [
        ({"horizon": 1e-4}, "cannot hold"),
        ({"n": 0}, "at least 1"),
        ({"variables": {"y": (0.0, 1.0)}}, "absent from the model"),
        ({"variables": {"x": (0.0, float("inf"))}}, "finite bounds"),
    ],
)
def test_invalid_encodings_are_rejected(f, kwargs, message):
    with pytest.raises(EncodingError, match=message):
        encode(f, "F[0, 5] x >= 3", **kwargs)


def test_formula_must_be_normalized(f, encoding_config):
    with pytest.raises(EncodingError, match="negation normal form"):
        encode_formula(Not(f("F[0, 5] x >= 3")), 2, 10.0, encoding_config, BOX)
    with pytest.raises(EncodingError, match="rewritten"):
        encode_formula(f("x >= 0 U[0, 2] y >= 1"), 2, 10.0, encoding_config, BOX)


def test_parameters_need_domains(f, encoding_config):
    phi = normalize(f("x >= p", {"p": (0.0, 1.0)}))
    with pytest.raises(EncodingError, match="without a bounded domain"):
        encode_formula(phi, 2, 10.0, encoding_config, BOX)


@pytest.mark.solver
@pytest.mark.parametrize(
    "text",
    [
        "F[0, 5] x >= 3",
        "G[0, 10] x <= 2 && F[2, 4] y >= 1",
        "F[1, 3] (x >= 4 && G[0, 2] y <= -1)",
        "x >= 1 U y >= 5",
        "G (x <= 8) && F (x >= 6)",
    ],
)
def test_solutions_decode_to_satisfying_traces(f, milp_solver, solver_config, text):
    phi, ctx = encode(f, text, n=5)
    result = solve(ctx.model, solver_config, ctx.config.m_max, milp_solver)
    assert result.status.has_solution
    values = bind_solution(ctx.model, result.values)
    trace, gamma, theta = decode_trace(values, ctx.registry)
    assert gamma[0] == pytest.approx(0.0)
    assert gamma[-1] == pytest.approx(10.0)
    tolerance = validation_tolerance(trace)
    assert sat(trace, phi, tolerance)
    assert valuation_violations(trace, phi, gamma, theta, ctx.delta, tolerance) == []


@pytest.mark.solver
def test_contradictory_formula_is_infeasible(f, milp_solver, solver_config):
    _, ctx = encode(f, "G[0, 10] x >= 5 && F[0, 10] x <= 4", n=4)
    result = solve(ctx.model, solver_config, ctx.config.m_max, milp_solver)
    assert result.status is SolveStatus.INFEASIBLE
