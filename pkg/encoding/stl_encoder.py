"""Variable-interval MILP encoding of STL over a δ-stable partition.

⟨ψ⟩ᵢ = 1 certifies ψ on the whole closed interval Γᵢ = [γᵢ₋₁, γᵢ]; ⟨ψ⟩ᵢ = 0 certifies that ψ^δ
fails on all of Γᵢ. Every constraint family below keeps that reading sound.
"""

import logging
from typing import Mapping

from encoding.context import EncodingContext
from encoding.linearization import Condition, add_disjunction, literal
from formula.ast import (
    Always,
    And,
    Atom,
    Eventually,
    FalseFormula,
    Formula,
    Or,
    Release,
    TrueFormula,
    Until,
)
from milp.model import LinExpr, ObjectiveSense, Sense
from utilities.config import EncodingConfig
from utilities.exceptions import EncodingError

logger = logging.getLogger(__name__)


def encode_time_sequence(ctx: EncodingContext):
    """γ₀ = 0, γ_N = T, γᵢ − γᵢ₋₁ ≥ ε."""
    n, horizon, eps = ctx.n, ctx.horizon, ctx.epsilon
    if horizon < n * eps:
        raise EncodingError(f"T = {horizon:g} cannot hold N = {n} intervals of length at least ε = {eps:g}")
    model = ctx.model
    model.fix(ctx.gamma(0), 0.0)
    model.fix(ctx.gamma(n), horizon)
    for i in range(1, n + 1):
        model.add_constraint(ctx.duration(i), Sense.GE, eps, f"time_{i}")


def encode_atomics(ctx: EncodingContext):
    """ζ / ζ^δ realizability, crossing-pair stationarity and ⟨p⟩ᵢ = ζ^δᵢ₋₁ ∨ ζ^δᵢ."""
    model, n, delta, eps = ctx.model, ctx.n, ctx.delta, ctx.epsilon
    slacks = []
    for a, predicate in enumerate(ctx.atoms):
        zeta = ctx.registry.zeta.setdefault(predicate, [])
        zeta_delta = ctx.registry.zeta_delta.setdefault(predicate, [])
        for i in range(n + 1):
            z = model.add_binary(f"z_{a}_{i}")
            zd = model.add_binary(f"zd_{a}_{i}")
            ctx.register_symbol(z, f"ζ^p{a}_{i} for {predicate.to_text()}")
            ctx.register_symbol(zd, f"ζ^(δ,p{a})_{i} for {predicate.to_text()}")
            zeta.append(z)
            zeta_delta.append(zd)

            margin = ctx.margin(predicate, i)
            model.add_conditional(z, 1, margin, Sense.GE, 0.0, f"atom_{a}_{i}_t")
            model.add_conditional(z, 0, margin, Sense.LE, -eps, f"atom_{a}_{i}_f")
            model.add_conditional(zd, 1, margin, Sense.GE, delta, f"atom_{a}_{i}_dt")
            model.add_conditional(zd, 0, margin, Sense.LE, delta - eps, f"atom_{a}_{i}_df")

            if ctx.config.slack_objective:
                s = ctx.add_aux_continuous(f"slack_{a}_{i}", 0.0, 1.0, f"margin slack of p{a} at knot {i}")
                model.add_conditional(zd, 1, margin - s, Sense.GE, delta, f"slack_{a}_{i}_t")
                model.add_conditional(zd, 0, margin + s, Sense.LE, delta - eps, f"slack_{a}_{i}_f")
                slacks.append(s)

        for i in range(n):
            # ζ^δᵢ = 0 ∧ ζ^δᵢ₊₁ = 1 ⇒ ζᵢ = 1
            rise = ctx.add_aux_binary(f"st_{a}_{i}_up", f"δ-crossing upwards of p{a} at ({i}, {i + 1})")
            model.add_constraint(rise + zeta_delta[i], Sense.LE, 1.0, f"st_{a}_{i}_up_0")
            model.add_constraint(rise - zeta_delta[i + 1], Sense.LE, 0.0, f"st_{a}_{i}_up_1")
            model.add_constraint(rise - zeta_delta[i + 1] + zeta_delta[i], Sense.GE, 0.0, f"st_{a}_{i}_up_2")
            model.add_constraint(zeta[i] - rise, Sense.GE, 0.0, f"st_{a}_{i}_up")
            # ζ^δᵢ = 1 ∧ ζ^δᵢ₊₁ = 0 ⇒ ζᵢ₊₁ = 1
            fall = ctx.add_aux_binary(f"st_{a}_{i}_down", f"δ-crossing downwards of p{a} at ({i}, {i + 1})")
            model.add_constraint(fall - zeta_delta[i], Sense.LE, 0.0, f"st_{a}_{i}_down_0")
            model.add_constraint(fall + zeta_delta[i + 1], Sense.LE, 1.0, f"st_{a}_{i}_down_1")
            model.add_constraint(fall - zeta_delta[i] + zeta_delta[i + 1], Sense.GE, 0.0, f"st_{a}_{i}_down_2")
            model.add_constraint(zeta[i + 1] - fall, Sense.GE, 0.0, f"st_{a}_{i}_down")

        atom = Atom(predicate)
        for i in range(1, n + 1):
            model.add_or(ctx.theta(atom, i), [zeta_delta[i - 1], zeta_delta[i]], f"link_{a}_{i}")

    if slacks:
        model.set_objective(ObjectiveSense.MAXIMIZE, LinExpr.sum(slacks))


def encode_boolean(ctx: EncodingContext):
    """⊤ / ⊥ constants and m-ary ∧ / ∨ without auxiliary variables."""
    model = ctx.model
    for psi in ctx.subformulas:
        k = ctx.node_id(psi)
        for i in range(1, ctx.n + 1):
            match psi:
                case TrueFormula():
                    model.add_constraint(ctx.theta(psi, i), Sense.EQ, 1.0, f"true_{k}_{i}")
                case FalseFormula():
                    model.add_constraint(ctx.theta(psi, i), Sense.EQ, 0.0, f"false_{k}_{i}")
                case And(operands):
                    model.add_and(ctx.theta(psi, i), [ctx.theta(op, i) for op in operands], f"and_{k}_{i}")
                case Or(operands):
                    model.add_or(ctx.theta(psi, i), [ctx.theta(op, i) for op in operands], f"or_{k}_{i}")


def encode_unbounded(ctx: EncodingContext):
    """Backward recurrences for ◇, □, U and R over [0, ∞)."""
    model, n = ctx.model, ctx.n
    for psi in ctx.subformulas:
        if not isinstance(psi, (Eventually, Always, Until, Release)) or not psi.interval.is_unbounded:
            continue
        k = ctx.node_id(psi)
        last = psi.child if isinstance(psi, (Eventually, Always)) else psi.right
        model.add_constraint(ctx.theta(psi, n) - ctx.theta(last, n), Sense.EQ, 0.0, f"unb_{k}_{n}")
        for i in range(1, n):
            here, after = ctx.theta(psi, i), ctx.theta(psi, i + 1)
            match psi:
                case Eventually(_, child):
                    model.add_or(here, [ctx.theta(child, i), after], f"unb_{k}_{i}")
                case Always(_, child):
                    model.add_and(here, [ctx.theta(child, i), after], f"unb_{k}_{i}")
                case Until(_, left, right):
                    carry = ctx.node_aux(psi, i, i + 1, "carry")
                    model.add_and(carry, [after, ctx.theta(left, i)], f"unb_{k}_{i}_carry")
                    model.add_or(here, [ctx.theta(right, i), carry], f"unb_{k}_{i}")
                case Release(_, left, right):
                    carry = ctx.node_aux(psi, i, i + 1, "carry")
                    model.add_or(carry, [after, ctx.theta(left, i)], f"unb_{k}_{i}_carry")
                    model.add_and(here, [ctx.theta(right, i), carry], f"unb_{k}_{i}")


def _window(psi: Formula) -> tuple[float, float]:
    lo, hi = psi.interval.lo, psi.interval.hi
    if not psi.interval.is_numeric:
        raise EncodingError(f"window of {psi.to_text()} has symbolic bounds")
    lo, hi = float(lo), float(hi)
    if not 0 <= lo < hi < float("inf"):
        raise EncodingError(f"bounded window needs 0 ≤ a < b < ∞, got {psi.interval.to_text()}")
    return lo, hi


def _encode_bounded(ctx: EncodingContext, psi: Formula, polarity: int):
    """Shared schema of □[a,b] (polarity 1, accumulator S) and ◇[a,b] (polarity 0, accumulator P).

    The accumulator Aⱼ measures how long ⟨χ⟩ has held the value `polarity` up to γⱼ.
    Window family: ⟨ψ⟩ᵢ = polarity forces ⟨χ⟩ⱼ = polarity on every (γⱼ₋₁, γⱼ] meeting Γᵢ + [a, b].
    Bound family: ⟨ψ⟩ᵢ = 1 − polarity forces an interval with ⟨χ⟩ = 1 − polarity inside every
    t + [a, b], t ∈ Γᵢ, expressed as upper bounds on Aⱼ.
    """
    model, n, eps = ctx.model, ctx.n, ctx.epsilon
    a, b = _window(psi)
    child = psi.child
    k = ctx.node_id(psi)
    family = "S" if polarity == 1 else "P"
    store = ctx.registry.always_acc if polarity == 1 else ctx.registry.eventually_acc
    acc = store.setdefault(psi, [])
    for j in range(n + 1):
        var = model.add_continuous(f"{family}_{k}_{j}", 0.0, ctx.horizon)
        ctx.register_symbol(var, f"{family}^ψ{k}_{j}")
        acc.append(var)
    model.fix(acc[0], 0.0)
    for j in range(1, n + 1):
        chi = ctx.theta(child, j)
        model.add_conditional(chi, 1 - polarity, acc[j], Sense.LE, 0.0, f"{family}_{k}_{j}_reset")
        model.add_conditional(chi, polarity, acc[j] - acc[j - 1] - ctx.duration(j), Sense.GE, 0.0, f"{family}_{k}_{j}_grow")

    g = ctx.gamma
    for i in range(1, n + 1):
        theta_i = ctx.theta(psi, i)

        # window family, j ∈ [i, N + 1] with γ_{N+1} = ∞
        for j in range(i, n + 2):
            conditions = []
            if j > i:
                # γᵢ + b ≤ γⱼ₋₁
                conditions.append(Condition(g(j - 1) - g(i), Sense.GE, b))
            if j <= n and a > 0:
                # γᵢ₋₁ + a > γⱼ, strictly by ε
                conditions.append(Condition(g(i - 1) - g(j), Sense.GE, eps - a))
            add_disjunction(
                model,
                f"win_{k}_{i}_{j}",
                [literal(theta_i, 1 - polarity), literal(ctx.theta(child, j), polarity)],
                conditions,
                lambda tag, i=i, j=j: ctx.node_aux(psi, i, j, f"w{tag}"),
            )

        escape = literal(theta_i, polarity)
        for j in range(i, n + 1):
            # γⱼ ∈ (γᵢ₋₁ + b, γᵢ + b) ⇒ Aⱼ ≤ b − a
            add_disjunction(
                model,
                f"bnd_{k}_{i}_{j}_in",
                [escape],
                [
                    Condition(g(j) - g(i - 1), Sense.LE, b),
                    Condition(g(j) - g(i), Sense.GE, b),
                    Condition(LinExpr.of(acc[j]), Sense.LE, b - a),
                ],
                lambda tag, i=i, j=j: ctx.node_aux(psi, i, j, f"in{tag}"),
            )
            # γᵢ + b ∈ [γⱼ₋₁, γⱼ] ⇒ Aⱼ ≤ γⱼ − γᵢ − a; the escapes keep an ε margin
            add_disjunction(
                model,
                f"bnd_{k}_{i}_{j}_at",
                [escape],
                [
                    Condition(g(j - 1) - g(i), Sense.GE, b + eps),
                    Condition(g(i) - g(j), Sense.GE, eps - b),
                    Condition(acc[j] - g(j) + g(i), Sense.LE, -a),
                ],
                lambda tag, i=i, j=j: ctx.node_aux(psi, i, j, f"at{tag}"),
            )
        # γᵢ + b > γ_N ⇒ A_N ≤ max(0, γ_N − γᵢ − a)
        add_disjunction(
            model,
            f"bnd_{k}_{i}_tail",
            [escape],
            [
                Condition(g(i) - g(n), Sense.LE, -b),
                Condition(LinExpr.of(acc[n]), Sense.LE, 0.0),
                Condition(acc[n] - g(n) + g(i), Sense.LE, -a),
            ],
            lambda tag, i=i: ctx.node_aux(psi, i, n + 1, f"tail{tag}"),
        )


def encode_bounded_always(ctx: EncodingContext, psi: Always):
    _encode_bounded(ctx, psi, polarity=1)


def encode_bounded_eventually(ctx: EncodingContext, psi: Eventually):
    _encode_bounded(ctx, psi, polarity=0)


def _constraint_count(ctx: EncodingContext) -> int:
    return len(ctx.model.constraints) + len(ctx.model.conditionals)


def encode_formula(
    phi: Formula,
    n: int,
    horizon: float,
    config: EncodingConfig,
    variables: Mapping[str, tuple[float, float]],
    param_domains: Mapping[str, tuple[float, float]] | None = None,
    name: str = "stlts",
) -> EncodingContext:
    """Enc_STL(φ, N, T, δ) plus the fulfilling constraint ⟨φ⟩₁ = 1. `phi` must be normalized."""
    ctx = EncodingContext(phi, n, horizon, config, variables, param_domains, name)
    families = [
        ("time sequence", encode_time_sequence),
        ("atomic", encode_atomics),
        ("boolean", encode_boolean),
        ("unbounded temporal", encode_unbounded),
    ]
    for label, encode in families:
        before = _constraint_count(ctx)
        encode(ctx)
        logger.debug(f"{label} constraints: {_constraint_count(ctx) - before}")

    before = _constraint_count(ctx)
    for psi in ctx.subformulas:
        if isinstance(psi, Always) and not psi.interval.is_unbounded:
            encode_bounded_always(ctx, psi)
        elif isinstance(psi, Eventually) and not psi.interval.is_unbounded:
            encode_bounded_eventually(ctx, psi)
    logger.debug(f"bounded temporal constraints: {_constraint_count(ctx) - before}")

    ctx.model.add_constraint(ctx.theta(phi, 1), Sense.EQ, 1.0, "fulfil")
    logger.debug(f"Encoded N={n}, T={horizon:g}: {ctx.model.stats()} {ctx.registry.sizes()}")
    return ctx
