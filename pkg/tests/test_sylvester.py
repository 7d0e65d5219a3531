import json
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from quaternity import GF, HQ, QQ, Matrix, rank
from quaternity.errors import CharacteristicTwo, Infeasible, NotHermitianRHS, ParseError, ShapeMismatch
from quaternity.harness import exhaustive_entry_count, exhaustive_solvability, gen_random_instance, gen_solvable_instance
from quaternity.sylvester import (
    CONDITIONS, HERMITIAN_KINDS, HERMITIAN_UNKNOWNS, SystemInstance, SystemKind, assemble_recipe, check,
    cross_check, satisfies, solve_linearized, substitute, unknown_shapes,
)

from oracles import _sym, kron_solvable

KINDS = list(SystemKind)
PLAIN = [k for k in KINDS if k not in HERMITIAN_KINDS]
seeds = st.integers(0, 2**32 - 1)


def zero_rhs(inst):
    m = {k: (Matrix.zeros(inst.ring, v.rows, v.cols) if k in ("Phi", "Psi", "Omega") else v)
         for k, v in inst.matrices.items()}
    return SystemInstance(inst.kind, inst.ring, m)


def replace(inst, **mats):
    return SystemInstance(inst.kind, inst.ring, dict(inst.matrices, **mats))


def some_instance(kind, ring, seed=0, dims=3):
    """A constructed-solvable instance whose right-hand sides are all nonempty."""
    rng = random.Random(seed)
    while True:
        inst = gen_solvable_instance(kind, ring, dims, rng)[0]
        if all(inst[n].rows and inst[n].cols for n in ("Phi", "Psi", "Omega") if n in inst.matrices):
            return inst


# -- examples ---------------------------------------------------------------------

@pytest.mark.parametrize("kind", KINDS, ids=[k.value for k in KINDS])
@pytest.mark.parametrize("ring", [GF(3), QQ, HQ], ids=["GF(3)", "QQ", "HQ"])
def test_zero_rhs_is_solvable_by_zero(kind, ring):
    inst = zero_rhs(some_instance(kind, ring, seed=4))
    assert check(inst).verdict
    sol = solve_linearized(inst)
    assert all(v.is_zero() for v in sol.values.values())
    rec = cross_check(inst)
    assert rec.checker_verdict and rec.oracle_feasible and rec.agree


def _nonzero_like(ring, M):
    data = [list(r) for r in M.data]
    data[0][0] = ring.one
    return Matrix(ring, data, cols=M.cols)


@pytest.mark.parametrize("kind", [SystemKind.TWO_UNKNOWN, SystemKind.CLASSICAL_TRIPLE])
def test_zero_c_with_nonzero_psi_fails_column_range_condition(kind):
    ring = GF(3)
    inst = some_instance(kind, ring, seed=9)
    inst = replace(inst, C=Matrix.zeros(ring, *inst["C"].shape), Psi=_nonzero_like(ring, inst["Psi"]))
    rep = check(inst)
    assert not rep.verdict and "col-range-psi" in rep.failed()
    rec = cross_check(inst)
    assert (rec.checker_verdict, rec.oracle_feasible, rec.agree) == (False, False, True)
    with pytest.raises(Infeasible):
        solve_linearized(inst)


def test_zero_d_with_nonzero_omega_fails_three_unknown():
    ring = QQ
    inst = some_instance(SystemKind.THREE_UNKNOWN, ring, seed=2)
    inst = replace(inst, D=Matrix.zeros(ring, *inst["D"].shape), Omega=_nonzero_like(ring, inst["Omega"]))
    rep = check(inst)
    assert not rep.verdict and "col-range-omega" in rep.failed()


def test_identity_coefficients_recover_rhs():
    ring = QQ
    phi = Matrix(QQ, [[1, 2], [3, "1/2"]])
    z = Matrix.zeros
    inst = SystemInstance(SystemKind.CLASSICAL_TRIPLE, ring, {
        "A": Matrix.identity(QQ, 2), "E": Matrix.identity(QQ, 2), "Phi": phi,
        "C": z(QQ, 0, 2), "F": z(QQ, 2, 0), "Psi": z(QQ, 0, 0),
        "D": z(QQ, 0, 2), "G": z(QQ, 2, 0), "Omega": z(QQ, 0, 0),
    })
    assert solve_linearized(inst)["X"] == phi


def test_hermitian_preconditions():
    inst = some_instance(SystemKind.HERMITIAN_3_4, HQ, seed=1)
    n = inst["Phi"].rows
    if n:
        bad = Matrix(HQ, [[[0, 1, 0, 0] if (i, j) == (0, 0) else [0, 0, 0, 0] for j in range(n)] for i in range(n)])
        with pytest.raises(NotHermitianRHS):
            check(replace(inst, Phi=bad))
    gf2 = {k: Matrix.zeros(GF(2), *v.shape) for k, v in some_instance(SystemKind.HERMITIAN_3_4, GF(3)).matrices.items()}
    with pytest.raises(CharacteristicTwo):
        check(SystemInstance(SystemKind.HERMITIAN_3_4, GF(2), gf2))
    with pytest.raises(CharacteristicTwo):
        gen_solvable_instance(SystemKind.HERMITIAN_3_7, GF(2), 2, random.Random(0))


def test_condition_counts():
    counts = {k.value: len(v) for k, v in CONDITIONS.items()}
    assert counts == {"two_unknown": 18, "three_unknown": 11, "hermitian_3_4": 10,
                      "hermitian_3_5": 10, "hermitian_3_7": 7, "hermitian_3_8": 6}
    assert len(check(some_instance(SystemKind.CLASSICAL_TRIPLE, QQ)).conditions) == 18


# -- properties -------------------------------------------------------------------

@pytest.mark.parametrize("kind", KINDS, ids=[k.value for k in KINDS])
@pytest.mark.parametrize("ring", [GF(3), GF(7), QQ, HQ], ids=["GF(3)", "GF(7)", "QQ", "HQ"])
@given(seed=seeds)
def test_constructed_instances_are_solvable(kind, ring, seed):
    inst, unknowns = gen_solvable_instance(kind, ring, 2 if ring is HQ else 3, random.Random(seed))
    assert satisfies(inst, unknowns)
    rep = check(inst)
    assert rep.verdict, rep.failed()
    sol = solve_linearized(inst)
    assert satisfies(inst, sol.values)
    for u in HERMITIAN_UNKNOWNS.get(kind, ()):
        assert sol[u].is_hermitian() and sol.hermitian_flags[u]
    for name in ("Phi", "Psi", "Omega"):
        if kind in HERMITIAN_KINDS and name in inst.matrices and name != "Omega":
            assert inst[name].is_hermitian()


@pytest.mark.parametrize("kind", KINDS, ids=[k.value for k in KINDS])
@pytest.mark.parametrize("ring", [GF(2), GF(3), QQ, HQ], ids=["GF(2)", "GF(3)", "QQ", "HQ"])
@given(seed=seeds)
def test_checker_agrees_with_linearization(kind, ring, seed):
    if kind in HERMITIAN_KINDS and ring.characteristic == 2:
        return
    inst = gen_random_instance(kind, ring, 2 if ring is HQ else 3, random.Random(seed))
    rec = cross_check(inst)
    assert rec.agree, rec.to_json()
    rep = rec.report
    assert rep.verdict == all(c.holds for c in rep.conditions)
    if rec.solution is not None:
        assert satisfies(inst, rec.solution.values)


@pytest.mark.parametrize("kind", KINDS, ids=[k.value for k in KINDS])
@given(seed=seeds)
def test_checker_agrees_with_kronecker_oracle_over_rationals(kind, seed):
    inst = gen_random_instance(kind, QQ, 2, random.Random(seed))
    m = {k: _sym(v) for k, v in inst.matrices.items()}
    T = lambda name: m[name].T  # noqa: E731
    shapes = unknown_shapes(inst)
    table = {
        SystemKind.TWO_UNKNOWN: lambda: [("Phi", [(m["A"], "X", m["E"], False), (m["B"], "Y", m["H"], False)]),
                                 ("Psi", [(m["C"], "X", m["F"], False)]), ("Omega", [(m["D"], "X", m["G"], False)])],
        SystemKind.THREE_UNKNOWN: lambda: [("Phi", [(m["A"], "X", m["E"], False), (m["B"], "Y", None, False),
                                            (None, "Z", m["H"], False)]),
                                   ("Psi", [(m["C"], "X", m["F"], False)]), ("Omega", [(m["D"], "X", m["G"], False)])],
        SystemKind.CLASSICAL_TRIPLE: lambda: [("Phi", [(m["A"], "X", m["E"], False)]),
                                      ("Psi", [(m["C"], "X", m["F"], False)]), ("Omega", [(m["D"], "X", m["G"], False)])],
        SystemKind.HERMITIAN_3_4: lambda: [("Phi", [(m["A"], "X", T("A"), False), (m["B"], "Y", T("B"), False)]),
                                   ("Psi", [(m["C"], "X", T("C"), False)]), ("Omega", [(m["D"], "X", T("D"), False)])],
        SystemKind.HERMITIAN_3_5: lambda: [("Phi", [(m["A"], "X", T("A"), False), (m["B"], "Y", T("B"), False)]),
                                   ("Omega", [(m["C"], "X", m["D"], False)])],
        SystemKind.HERMITIAN_3_7: lambda: [("Phi", [(m["A"], "X", T("A"), False), (m["B"], "Y", None, False),
                                            (None, "Y", T("B"), True)]),
                                   ("Psi", [(m["C"], "X", T("C"), False)]), ("Omega", [(m["D"], "X", T("D"), False)])],
        SystemKind.HERMITIAN_3_8: lambda: [("Phi", [(m["A"], "X", T("A"), False), (m["B"], "Y", None, False),
                                            (None, "Y", T("B"), True)]),
                                   ("Omega", [(m["C"], "X", m["D"], False)])],
    }
    eqs = table[kind]()
    symmetric = HERMITIAN_UNKNOWNS.get(kind, ())
    assert check(inst).verdict == kron_solvable(eqs, m, shapes, symmetric)


@pytest.mark.parametrize("kind", KINDS, ids=[k.value for k in KINDS])
@given(seed=seeds)
def test_checker_agrees_with_enumeration(kind, seed):
    ring = GF(3) if kind in HERMITIAN_KINDS else GF(2)
    inst = gen_random_instance(kind, ring, 2, random.Random(seed))
    if ring.modulus ** exhaustive_entry_count(inst) > 1 << 16:
        return
    truth = exhaustive_solvability(inst)
    assert check(inst).verdict == truth
    assert cross_check(inst).oracle_feasible == truth


def test_enumeration_examples():
    ring = GF(2)
    z = Matrix.zeros
    base = {"A": z(ring, 1, 1), "E": Matrix.identity(ring, 1), "Phi": Matrix(ring, [[1]]),
            "C": z(ring, 0, 1), "F": z(ring, 1, 0), "Psi": z(ring, 0, 0),
            "D": z(ring, 0, 1), "G": z(ring, 1, 0), "Omega": z(ring, 0, 0)}
    inst = SystemInstance(SystemKind.CLASSICAL_TRIPLE, ring, base)
    assert exhaustive_solvability(inst) is False
    assert exhaustive_solvability(zero_rhs(inst)) is True


@pytest.mark.parametrize("kind", KINDS, ids=[k.value for k in KINDS])
def test_report_ranks_reproduce_from_recipes(kind):
    ring = GF(3) if kind in HERMITIAN_KINDS else GF(2)
    inst = gen_random_instance(kind, ring, 3, random.Random(17))
    mats = dict(inst.matrices)
    if kind is SystemKind.CLASSICAL_TRIPLE:
        mats["B"] = Matrix.zeros(ring, mats["A"].rows, 0)
        mats["H"] = Matrix.zeros(ring, 0, mats["E"].cols)
    for c in check(inst).conditions:
        assert rank(assemble_recipe(mats, c.lhs_matrix_recipe)) == c.lhs_rank
        total = 0
        for term in c.rhs_rank_expression.split(" + "):
            coef, _, recipe = term.partition("r(")
            total += int(coef or 1) * rank(assemble_recipe(mats, recipe[:-1]))
        assert total == c.rhs_rank


# -- interchange ------------------------------------------------------------------

@pytest.mark.parametrize("kind", KINDS, ids=[k.value for k in KINDS])
def test_instance_json_round_trip(kind):
    inst = some_instance(kind, HQ, seed=3, dims=2)
    again = SystemInstance.loads(inst.dumps())
    assert again == inst
    assert json.loads(again.dumps()) == json.loads(inst.dumps())


def test_instance_parse_errors_name_fields():
    good = some_instance(SystemKind.TWO_UNKNOWN, GF(3)).to_json()
    with pytest.raises(ParseError, match="kind"):
        SystemInstance.from_json(dict(good, kind="four_unknown"))
    with pytest.raises(ParseError, match="matrices.Phi"):
        SystemInstance.from_json(dict(good, matrices=dict(good["matrices"], Phi={"ring": "prime_field", "p": 3})))
    with pytest.raises(ShapeMismatch, match="missing"):
        SystemInstance.from_json(dict(good, matrices={k: v for k, v in good["matrices"].items() if k != "G"}))
    wrong = dict(good["matrices"])
    wrong["Phi"] = Matrix.zeros(GF(3), 7, 7).to_json()
    with pytest.raises(ShapeMismatch):
        SystemInstance.from_json(dict(good, matrices=wrong))


def test_substitute_reports_each_equation():
    inst, unknowns = gen_solvable_instance(SystemKind.TWO_UNKNOWN, GF(7), 3, random.Random(5))
    assert substitute(inst, unknowns) == {k: inst[k] for k in ("Phi", "Psi", "Omega")}
