"""Checks for the worked micro-instances in ``data/golden.json``.

Each section of the golden file has one checker.  A checker receives one
case dict and raises ``AssertionError`` on mismatch.  Structural values are
compared exactly, numeric ones to ``NUM_TOL`` unless the case states its own
tolerance.  Eigen-chains are not unique, so chain cases also re-verify the
chain relations and the sign pattern.
"""
import json
from pathlib import Path

import numpy as np

import minmaxspec as mm
from minmaxspec.perron import fundamental_solve

GOLDEN_PATH = Path(__file__).parent / "data" / "golden.json"
NUM_TOL = 1e-9


def load_golden():
    return json.loads(GOLDEN_PATH.read_text())


def _arr(x):
    return np.asarray(x, dtype=float)


def _close(actual, expected, tol=NUM_TOL):
    actual, expected = _arr(actual), _arr(expected)
    assert actual.shape == expected.shape, (actual, expected)
    assert np.allclose(actual, expected, rtol=tol, atol=tol), (actual, expected)


def _family(case, doc):
    if "family" in case:
        return mm.family_from_matrices([_arr(M) for M in doc["families"][case["family"]]])
    if "matrices" in case:
        return mm.family_from_matrices([_arr(M) for M in case["matrices"]])
    return mm.single(_arr(case["matrix"]))


def _descs(ds):
    return [[d.beta, d.k] for d in ds]


def _by_class_order(cs):
    """Class indices ordered by their smallest state."""
    return sorted(range(len(cs.classes)), key=lambda c: min(cs.classes[c]))


def check_classes(case, doc):
    parts, access = mm.classes(_arr(case["A"]))
    assert sorted(parts) == [tuple(c) for c in case["classes"]]
    # translate class-index access pairs into smallest-state pairs
    rep = {c: min(p) for c, p in enumerate(parts)}
    order = {min(p): k for k, p in enumerate(sorted(parts))}
    got = sorted([order[rep[c]], order[rep[d]]] for c, d in access)
    assert got == case["access"], got


def check_classify(case, doc):
    cs = mm.classify(_arr(case["A"]))
    order = _by_class_order(cs)
    assert abs(cs.spr - case["spr"]) <= NUM_TOL
    _close([cs.class_spr[c] for c in order], case["class_spr"])
    assert [cs.is_basic[c] for c in order] == case["is_basic"]
    assert [cs.is_final[c] for c in order] == case["is_final"]
    assert [cs.depth[c] for c in order] == case["depth"]
    assert cs.degree == case["degree"]
    assert [list(S) for S in cs.principal_partition] == case["partition"]


def check_spectral_radius(case, doc):
    _close(mm.spectral_radius(_arr(case["A"])), case["value"])


def check_perron_vector(case, doc):
    _close(mm.perron_vector(_arr(case["A"])), case["v"])


def check_positive_eigenvector_single(case, doc):
    got = mm.positive_eigenvector_single(_arr(case["A"]))
    if case["result"] is None:
        assert got is None
    else:
        lam, v = got
        _close(lam, case["result"]["lam"])
        _close(v / v.max(), case["result"]["v"])


def check_dual_matrix(case, doc):
    _close(mm.dual_matrix(_arr(case["A"])), case["Astar"], 1e-8)


def check_fundamental_solve(case, doc):
    x = fundamental_solve(_arr(case["A"]), _arr(case["Astar"]), case["lam"], _arr(case["b"]))
    _close(x, case["x"], 1e-8)


def check_solve_nested_linear(case, doc):
    B = _arr(case["B"])
    v = mm.solve_nested_linear(B, case["lam"], mm.dual_matrix(B), [_arr(r) for r in case["r"]])
    _close(v, case["v"], 1e-8)


def _check_chain(chain, op, case):
    assert chain.nu == case["nu"]
    assert chain.residual(op) <= 1e-8
    assert chain.sign_pattern_ok()
    _close(np.array(chain.vectors), case["vectors"], 1e-8)


def check_rothblum_chain(case, doc):
    A = _arr(case["A"])
    _check_chain(mm.rothblum_chain(A), lambda v: A @ v, case)


def check_growth_descriptors(case, doc):
    assert _descs(mm.growth_descriptors(_arr(case["A"]))) == case["d"]


def check_combine_growth(case, doc):
    d = mm.combine_growth(case["lam"], mm.GrowthDescriptor(*case["d"]))
    assert [d.beta, d.k] == case["out"]


def check_family_from_matrices(case, doc):
    F = mm.family_from_matrices([_arr(M) for M in case["matrices"]])
    assert [r.tolist() for r in F.rows] == case["rows"]
    assert F.closure_size == case["closure_size"]


def check_apply(case, doc):
    _close(mm.apply(_family(case, doc), _arr(case["v"]), case["mode"]), case["out"])


def check_select_policy(case, doc):
    inc = None if case["incumbent"] is None else tuple(case["incumbent"])
    got = mm.select_policy(_family(case, doc), _arr(case["v"]), case["mode"], inc)
    assert list(got) == case["policy"]


def check_enumerate_closure(case, doc):
    got = sorted(M.tolist() for _, M in mm.enumerate_closure(_family(case, doc)))
    assert got == sorted(case["matrices"])


def check_extremal_matrix(case, doc):
    F = _family(case, doc)
    for strategy in ("brute", "recursive"):
        _, B = mm.extremal_matrix(F, case["mode"], strategy)
        assert B.tolist() == case["matrix"], (strategy, B)


def check_minimal_partition(case, doc):
    mp = mm.minimal_partition(_family(case, doc))
    assert [list(S) for S in mp.partition] == case["partition"]
    _close(mp.lam, case["lam"])
    assert mp.nu == case["nu"]


def check_positive_eigenvector_min(case, doc):
    got = mm.positive_eigenvector_min(_family(case, doc))
    if case["result"] is None:
        assert got is None
    else:
        _close(got.lam, case["result"]["lam"])
        _close(got.vector, case["result"]["v"])


def check_irreducible_eigenvector_min(case, doc):
    got = mm.irreducible_eigenvector_min(_family(case, doc))
    _close(got.lam, case["lam"])
    _close(got.vector, case["v"])
    assert got.unique is True


def check_generalized_chain_min(case, doc):
    F = _family(case, doc)
    _check_chain(mm.generalized_chain_min(F), lambda v: mm.apply(F, v, "min"), case)


def check_growth(case, doc):
    assert _descs(mm.growth_all(_family(case, doc), case["mode"])) == case["d"]


def check_characterize(case, doc):
    ch = mm.characterize(_family(case, doc))
    assert [ch.a, ch.b, ch.c, ch.d] == case["flags"]
    assert ch.consistent


def check_iterate(case, doc):
    op = _arr(case["matrix"]) if "matrix" in case else _family(case, doc)
    trace = mm.iterate(op, _arr(case["v0"]), case["steps"], case.get("mode", "min"))
    _close([trace.magnitudes(k) for k in range(case["steps"] + 1)], case["magnitudes"])


def check_estimate_growth(case, doc):
    op = _arr(case["matrix"]) if "matrix" in case else _family(case, doc)
    v0 = np.ones(op.shape[0] if isinstance(op, np.ndarray) else op.n)
    trace = mm.iterate(op, v0, case["steps"], case.get("mode", "min"))
    est = mm.estimate_growth(trace, case["state"])
    assert abs(est.beta - case["beta"]) <= case["beta_tol"], est
    assert est.k == case["k"], est


def check_compare_growth(case, doc):
    got = mm.compare_growth(tuple(case["predicted"]), tuple(case["estimated"]),
                            case["tol"], case["require_k"])
    assert got == case["pass"]


def check_nested_policy_iteration(case, doc):
    F = _family(case, doc)
    assert case["forcing"] == "row_sums"
    sol = mm.nested_policy_iteration(F, case["t"], lambda p: [F.matrix(p).sum(axis=1)])
    _close(sol.vectors, case["v"], 1e-10)
    assert list(sol.policy) == case["policy"]


CHECKERS = {name[len("check_"):]: fn for name, fn in globals().items() if name.startswith("check_")}


def cases(doc=None):
    """``(section, index, case)`` for every case of the golden file."""
    doc = doc or load_golden()
    return [
        (section, k, case)
        for section, items in doc.items()
        if section in CHECKERS
        for k, case in enumerate(items)
    ]
