"""Signatures and rewrite-rule tables for the three environments.

Each environment's action table is a fixed, ordered list. The arithmetic
table has 7 rewrites plus 2 cursor moves; the polynomial table extends it to
26 rewrites plus 2 moves (three of the extra actions apply either an additive
or a multiplicative schema, whichever matches). The loop-theory table is
generated from 87 equations, each usable in both directions, plus 3 moves:
174 + 3 = 177 actions. Ten of the backward directions have an unbound
variable on their output side; applying one of those instantiates it with a
machine-introduced fresh variable (v0, v1, ...).
"""

from __future__ import annotations

from .terms import CONSTANT, OPERATOR, VARIABLE, Signature, Symbol

RA_SIG = Signature(
    "ra",
    [
        Symbol("0", 0, CONSTANT),
        Symbol("S", 1, OPERATOR),
        Symbol("+", 2, OPERATOR),
        Symbol("*", 2, OPERATOR),
    ],
    numerals=True,
)

POLY_SIG = Signature(
    "poly",
    [
        Symbol("0", 0, CONSTANT),
        Symbol("1", 0, CONSTANT),
        Symbol("x", 0, VARIABLE),
        Symbol("y", 0, VARIABLE),
        Symbol("z", 0, VARIABLE),
        Symbol("S", 1, OPERATOR),
        Symbol("+", 2, OPERATOR),
        Symbol("*", 2, OPERATOR),
        Symbol("^", 2, OPERATOR),
    ],
    numerals=True,
)

AIM_SIG = Signature(
    "aim",
    [
        Symbol("e", 0, CONSTANT),
        Symbol("x", 0, VARIABLE),
        Symbol("y", 0, VARIABLE),
        Symbol("z", 0, VARIABLE),
        Symbol("u", 0, VARIABLE),
        Symbol("v", 0, VARIABLE),
        Symbol("w", 0, VARIABLE),
        Symbol("*", 2, OPERATOR),
        Symbol("/", 2, OPERATOR),
        Symbol("\\", 2, OPERATOR),
        Symbol("=", 2, OPERATOR),
        Symbol("T", 2, OPERATOR),
        Symbol("K", 2, OPERATOR),
        Symbol("a", 3, OPERATOR),
        Symbol("L", 3, OPERATOR),
        Symbol("R", 3, OPERATOR),
    ],
    aliases={"1": "e"},
    fresh_ok=True,
)

# Arithmetic rewrite actions in table order (cursor moves are appended by the
# environment builder as ids 7 and 8).
RA_REWRITES: list[tuple[str, str, str]] = [
    ("drop_zero", "(+ ?x 0)", "?x"),
    ("wrap_zero", "?x", "(+ ?x 0)"),
    ("push_succ", "(+ ?x (S ?y))", "(S (+ ?x ?y))"),
    ("pull_succ", "(S (+ ?x ?y))", "(+ ?x (S ?y))"),
    ("mul_zero", "(* ?x 0)", "0"),
    ("expand_mul", "(* ?x (S ?y))", "(+ (* ?x ?y) ?x)"),
    ("fold_mul", "(+ (* ?x ?y) ?x)", "(* ?x (S ?y))"),
]

# Polynomial rewrite actions. Each entry is (name, [(lhs, rhs), ...]); a
# multi-schema action applies the first schema that matches at the cursor
# (the schemas have distinct root shapes, so at most one can match).
# Table positions 8 and 9 (1-based) are the cursor moves; the environment
# builder interleaves them.
POLY_REWRITES: list[tuple[str, list[tuple[str, str]]]] = [
    ("drop_zero", [("(+ ?x 0)", "?x")]),
    ("wrap_zero", [("?x", "(+ ?x 0)")]),
    ("push_succ", [("(+ ?x (S ?y))", "(S (+ ?x ?y))")]),
    ("pull_succ", [("(S (+ ?x ?y))", "(+ ?x (S ?y))")]),
    ("mul_zero", [("(* ?x 0)", "0")]),
    ("expand_mul", [("(* ?x (S ?y))", "(+ (* ?x ?y) ?x)")]),
    ("fold_mul", [("(+ (* ?x ?y) ?x)", "(* ?x (S ?y))")]),
    ("commute", [("(+ ?x ?y)", "(+ ?y ?x)"), ("(* ?x ?y)", "(* ?y ?x)")]),
    ("pow_zero", [("(^ ?x 0)", "1")]),
    ("expand_pow", [("(^ ?x (S ?y))", "(* (^ ?x ?y) ?x)")]),
    ("fold_pow", [("(* (^ ?x ?y) ?x)", "(^ ?x (S ?y))")]),
    (
        "assoc_right",
        [
            ("(+ (+ ?x ?y) ?z)", "(+ ?x (+ ?y ?z))"),
            ("(* (* ?x ?y) ?z)", "(* ?x (* ?y ?z))"),
        ],
    ),
    (
        "assoc_left",
        [
            ("(+ ?x (+ ?y ?z))", "(+ (+ ?x ?y) ?z)"),
            ("(* ?x (* ?y ?z))", "(* (* ?x ?y) ?z)"),
        ],
    ),
    ("distribute", [("(* ?x (+ ?y ?z))", "(+ (* ?x ?y) (* ?x ?z))")]),
    ("factor", [("(+ (* ?x ?y) (* ?x ?z))", "(* ?x (+ ?y ?z))")]),
    ("drop_one", [("(* ?x 1)", "?x")]),
    ("wrap_one", [("?x", "(* ?x 1)")]),
    ("one_pow", [("(^ 1 ?x)", "1")]),
    ("pow_one", [("(^ ?x 1)", "?x")]),
    ("wrap_pow_one", [("?x", "(^ ?x 1)")]),
    ("split_pow_add", [("(^ ?x (+ ?y ?z))", "(* (^ ?x ?y) (^ ?x ?z))")]),
    ("join_pow_add", [("(* (^ ?x ?y) (^ ?x ?z))", "(^ ?x (+ ?y ?z))")]),
    ("split_pow_mulbase", [("(^ (* ?x ?y) ?z)", "(* (^ ?x ?z) (^ ?y ?z))")]),
    ("join_pow_mulbase", [("(* (^ ?x ?z) (^ ?y ?z))", "(^ (* ?x ?y) ?z)")]),
    ("flatten_pow", [("(^ (^ ?x ?y) ?z)", "(^ ?x (* ?y ?z))")]),
    ("nest_pow", [("(^ ?x (* ?y ?z))", "(^ (^ ?x ?y) ?z)")]),
]

# Loop-theory equations: axioms, operator definitions and established
# identities of the domain, in fixed table order. Each yields two directed
# actions (left-to-right, then right-to-left).
AIM_EQUATIONS: list[tuple[str, str, str]] = [
    ("lid", "(* e ?x)", "?x"),
    ("rid", "(* ?x e)", "?x"),
    ("b1", "(\\ ?x (* ?x ?y))", "?y"),
    ("b2", "(* ?x (\\ ?x ?y))", "?y"),
    ("s1", "(/ (* ?x ?y) ?y)", "?x"),
    ("s2", "(* (/ ?x ?y) ?y)", "?x"),
    ("def_a", "(a ?x ?y ?z)", "(\\ (* ?x (* ?y ?z)) (* (* ?x ?y) ?z))"),
    ("def_K", "(K ?x ?y)", "(\\ (* ?y ?x) (* ?x ?y))"),
    ("def_T", "(T ?u ?x)", "(\\ ?x (* ?u ?x))"),
    ("def_L", "(L ?u ?x ?y)", "(\\ (* ?y ?x) (* ?y (* ?x ?u)))"),
    ("def_R", "(R ?u ?x ?y)", "(/ (* (* ?u ?x) ?y) (* ?x ?y))"),
    ("TT", "(T (T ?u ?x) ?y)", "(T (T ?u ?y) ?x)"),
    ("TL", "(T (L ?u ?x ?y) ?z)", "(L (T ?u ?z) ?x ?y)"),
    ("TR", "(T (R ?u ?x ?y) ?z)", "(R (T ?u ?z) ?x ?y)"),
    ("LR", "(L (R ?u ?x ?y) ?z ?w)", "(R (L ?u ?z ?w) ?x ?y)"),
    ("LL", "(L (L ?u ?x ?y) ?z ?w)", "(L (L ?u ?z ?w) ?x ?y)"),
    ("RR", "(R (R ?u ?x ?y) ?z ?w)", "(R (R ?u ?z ?w) ?x ?y)"),
    ("id1", "(/ ?y (\\ ?x ?y))", "?x"),
    ("id2", "(\\ (/ ?y ?x) ?y)", "?x"),
    ("id3", "(\\ e ?x)", "?x"),
    ("id4", "(/ ?x e)", "?x"),
    ("id5", "(\\ ?x ?x)", "e"),
    ("id6", "(/ ?x ?x)", "e"),
    ("prop_034cf5c5", "(* ?x (T ?y ?x))", "(* ?y ?x)"),
    ("prop_66f8dd43", "(T (/ ?x ?y) ?y)", "(\\ ?y ?x)"),
    ("prop_81894ca4", "(/ (* ?x (T ?y ?x)) ?x)", "?y"),
    ("prop_da4738e2", "(T ?x (\\ ?x ?y))", "(\\ (\\ ?x ?y) ?y)"),
    ("prop_4a90a23f", "(* ?x (T (T ?y ?x) ?z))", "(* (T ?y ?z) ?x)"),
    ("prop_73fa4877", "(T (T (/ ?x ?y) ?z) ?y)", "(T (\\ ?y ?x) ?z)"),
    ("prop_d10a3b1a", "(* (* ?x ?y) (L ?z ?y ?x))", "(* ?x (* ?y ?z))"),
    ("prop_293cbc16", "(L (\\ ?x ?y) ?x ?z)", "(\\ (* ?z ?x) (* ?z ?y))"),
    ("prop_55464ec9", "(* (R ?x ?y ?z) (* ?y ?z))", "(* (* ?x ?y) ?z)"),
    ("prop_61fb8127", "(R (/ ?x ?y) ?y ?z)", "(/ (* ?x ?z) (* ?y ?z))"),
    ("prop_ddd1c86f", "(* ?x (* (\\ ?x e) ?y))", "(L ?y (\\ ?x e) ?x)"),
    ("prop_0d7e7151", "(* (\\ ?x e) ?y)", "(\\ ?x (L ?y (\\ ?x e) ?x))"),
    ("prop_1aae4a83", "(* ?x (L (T ?y ?x) ?z ?w))", "(* (L ?y ?z ?w) ?x)"),
    ("prop_1db0183a", "(* ?x (R (T ?y ?x) ?z ?w))", "(* (R ?y ?z ?w) ?x)"),
    ("prop_a4abb1e0", "(T (R (/ ?x ?y) ?z ?w) ?y)", "(R (\\ ?y ?x) ?z ?w)"),
    ("prop_55842885", "(* (T (/ ?x ?y) ?z) ?y)", "(* ?y (T (\\ ?y ?x) ?z))"),
    ("prop_1a725917", "(\\ (* ?x ?y) (* ?x (* ?z ?y)))", "(L (T ?z ?y) ?y ?x)"),
    ("prop_c626af2d", "(T ?x (* ?x ?y))", "(L (T ?x ?y) ?y ?x)"),
    ("prop_526a359c", "(T (/ (* ?x ?y) (* ?z ?y)) ?z)", "(R (\\ ?z ?x) ?z ?y)"),
    ("prop_deeac89a", "(* (T (R ?x ?y ?z) ?w) (* ?y ?z))", "(* (* (T ?x ?w) ?y) ?z)"),
    ("prop_575d1ed9", "(R ?x (\\ ?x e) ?y)", "(/ ?y (* (\\ ?x e) ?y))"),
    ("prop_f338e359", "(* (/ e ?x) (* ?x ?y))", "(L ?y ?x (/ e ?x))"),
    ("prop_5a914e30", "(R ?x ?y (\\ ?y e))", "(* (* ?x ?y) (\\ ?y e))"),
    ("prop_cc8a9ae6", "(R ?x (/ e ?y) ?y)", "(* (* ?x (/ e ?y)) ?y)"),
    ("prop_c2aa8580", "(L (\\ ?x (\\ ?y ?z)) ?x ?y)", "(\\ (* ?y ?x) ?z)"),
    ("prop_b3890d2c", "(R (/ ?x ?y) ?y (\\ ?y e))", "(* ?x (\\ ?y e))"),
    ("prop_f14899ed", "(T (L (/ ?x ?y) ?z ?w) ?y)", "(L (\\ ?y ?x) ?z ?w)"),
    ("prop_f2b7d0ab", "(L (\\ ?x (T ?y ?z)) ?x ?z)", "(\\ (* ?z ?x) (* ?y ?z))"),
    ("prop_be6cad0a", "(R (/ (/ ?x ?y) ?z) ?z ?y)", "(/ ?x (* ?z ?y))"),
    ("prop_1e558562", "(L (/ (\\ ?x ?y) ?z) ?z ?x)", "(/ (* ?z (\\ (* ?x ?z) ?y)) ?z)"),
    ("prop_e9eef609", "(K (\\ ?x e) ?x)", "(* (\\ ?x e) ?x)"),
    ("prop_9ee87fb5", "(K ?x (/ e ?x))", "(* ?x (/ e ?x))"),
    ("prop_da958b3f", "(L (\\ ?x e) ?x ?y)", "(\\ (* ?y ?x) ?y)"),
    ("prop_c3fa51e8", "(R (/ e ?x) ?x ?y)", "(/ ?y (* ?x ?y))"),
    ("prop_ba6418d1", "(\\ (R (/ e ?x) ?x ?y) ?y)", "(* ?x ?y)"),
    ("prop_d7dd57dd", "(\\ (* ?x ?y) (* (* ?z ?x) ?y))", "(R (T ?z (* ?x ?y)) ?x ?y)"),
    ("prop_e1aa92db", "(* (* ?x ?y) (K ?y ?x))", "(* ?y ?x)"),
    ("prop_19fcac9b2", "(* (R (/ ?x ?y) ?z ?w) ?y)", "(* ?y (R (\\ ?y ?x) ?z ?w))"),
    (
        "prop_3d75df700",
        "(* (* ?x ?y) (R (\\ (* ?x ?y) ?y) ?z ?w))",
        "(* (* ?x (R (\\ ?x e) ?z ?w)) ?y)",
    ),
    (
        "prop_acafcc6f0",
        "(L (R (\\ ?x (\\ ?y ?z)) ?w ?u) ?x ?y)",
        "(R (\\ (* ?y ?x) ?z) ?w ?u)",
    ),
    (
        "prop_203fc9151",
        "(* ?x (* ?y (R (\\ ?y (\\ ?x ?y)) ?z ?w)))",
        "(* (* ?x (R (\\ ?x e) ?z ?w)) ?y)",
    ),
    (
        "prop_2e844a2a9",
        "(* (* ?x ?y) (R (\\ (* ?x ?y) ?z) ?w ?u))",
        "(* ?x (* ?y (R (\\ ?y (\\ ?x ?z)) ?w ?u)))",
    ),
    (
        "prop_d9f457e09",
        "(* (\\ ?x ?y) (R (\\ (\\ ?x ?y) ?y) ?z ?w))",
        "(* (R ?x ?z ?w) (\\ ?x ?y))",
    ),
    ("prop_ce2987245", "(\\ ?x (R ?x ?y ?z))", "(* (R ?x ?y ?z) (\\ ?x e))"),
    ("prop_b7fe5fbfb", "(K (\\ ?x e) ?x)", "(\\ (/ e ?x) (\\ ?x e))"),
    ("prov9_7c96e347d4", "(R (T (/ e ?x) ?z) ?x ?y)", "(T (/ ?y (* ?x ?y)) ?z)"),
    ("prov9_3e047dc57d", "(\\ (R ?x (\\ ?x e) ?y) ?y)", "(* (\\ ?x e) ?y)"),
    ("prov9_ee78192c46", "(* (R ?x ?y ?x) (* ?y ?x))", "(* (* ?y ?x) (T ?x ?y))"),
    ("prov9_062c221162", "(T ?x ?y)", "(R (T ?x (* ?y ?x)) ?y ?x)"),
    ("prov9_d18167fcf7", "(* ?x (\\ (T ?x ?y) e))", "(\\ (T ?x ?y) ?x)"),
    (
        "prov9_6385279d78",
        "(/ (\\ ?x ?y) (/ ?y ?x))",
        "(* (/ e (/ ?y ?x)) (\\ ?x ?y))",
    ),
    ("prov9_b192646899", "(* ?x (T (\\ ?x e) ?y))", "(K (\\ ?y (/ ?y ?x)) ?y)"),
    ("prov9_2e3bc568bd_alt1", "(* (K (\\ ?x (/ ?x (/ e ?y))) ?x) ?y)", "(T ?y ?x)"),
    ("prov9_1ffb5e2572", "(L (T (\\ ?x e) ?z) ?x ?y)", "(T (\\ (* ?y ?x) ?y) ?z)"),
    (
        "prov9_7fed2c3e64",
        "(* (* ?x ?y) (T (\\ (* ?x ?y) ?x) ?z))",
        "(* ?x (* ?y (T (\\ ?y e) ?z)))",
    ),
    (
        "prov9_47e1e09ded",
        "(* (* ?x ?y) (T (\\ (* ?x ?y) ?y) ?z))",
        "(* (* ?x (T (\\ ?x e) ?z)) ?y)",
    ),
    (
        "prov9_a06014c62d_com",
        "(* ?x (* ?x (T (\\ ?x e) ?y)))",
        "(* (* ?x (T (\\ ?x e) ?y)) ?x)",
    ),
    ("prov9_a06014c62d", "(T ?x (* ?x (T (\\ ?x e) ?y)))", "?x"),
    ("prov9_49726cdcf0", "(T ?x (* (\\ ?x e) ?x))", "?x"),
    ("prov9_a69214de59", "(R ?x (\\ ?x e) ?x)", "(T ?x (\\ ?x e))"),
    ("prov9_3a3c9a39ee", "(\\ (T ?x (\\ ?x e)) e)", "(T (\\ ?x e) ?x)"),
    ("prov9_1cecad55d3", "(T ?x (/ e ?x))", "(\\ (\\ ?x e) e)"),
    ("prov9_13e5c8ed0a", "(T (/ e (/ e ?x)) (\\ ?x e))", "?x"),
    ("prov9_183b179b43", "(* (K ?x (\\ ?x e)) ?x)", "(T ?x (\\ ?x e))"),
]

# Backward directions that must invent a term: their output side has one
# pattern variable the matched side does not bind.
AIM_INTRODUCING_BWD = frozenset(
    {
        "b1",
        "b2",
        "s1",
        "s2",
        "id1",
        "id2",
        "id5",
        "id6",
        "prop_81894ca4",
        "prov9_a06014c62d",
    }
)
