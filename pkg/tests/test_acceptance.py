"""Acceptance suite: one test per acceptance criterion, exact integer
equality throughout, one PASS/FAIL line printed per criterion (runtimes are
informational targets, printed but not asserted).

Criterion 9 is expected to fail honestly: four of the thirty transcribed
catalog rows (13, 70, 95, 127) do not satisfy the semisparse criterion, with
machine-verified witnesses; the analysis lives in the repository notes and
in test_semisparse.py, where the computed 26/4 split is pinned green.
"""
import time

import pytest

from polytope535.build import OMEGA_WORD, W_ORDER, get_universe
from polytope535.census import face_space, orbit_census
from polytope535.coset_enum import coset_action, enumerate_cosets
from polytope535.perms import Word, evaluate_word
from polytope535.pipeline import X_TEXT, Y_TEXT
from polytope535.semisparse import is_semisparse, table1_catalog, v_words, verify_witness
from polytope535.stabchain import build_chain, conjugacy_orbit, normalizer_via_orbit
from polytope535.subgroups import builtin_spec, realize


@pytest.fixture(scope="module")
def universe():
    return get_universe()


def announce(number, name, ok, detail="", started=None):
    elapsed = f" [{time.time() - started:.1f}s]" if started else ""
    print(f"\nACCEPTANCE {number:02d} {name}: {'PASS' if ok else 'FAIL'}"
          f" ({detail}){elapsed}")
    return ok


def test_c01_first_factor_enumeration(universe):
    t0 = time.time()
    pres = universe.w_prime_presentation
    words = tuple(Word.parse(t, pres.alphabet) for t in ("s0", "s1", "s2"))
    table = enumerate_cosets(pres, words)
    order = build_chain(coset_action(table).perms).order
    ok = table.index == 1463 and order == 175_560
    assert announce(1, "first-factor facet enumeration", ok,
                    f"index={table.index} order={order}, target <10s", t0)


def test_c02_second_factor_enumeration(universe):
    t0 = time.time()
    pres = universe.w_doubleprime_presentation
    words = tuple(Word.parse(t, pres.alphabet) for t in ("s0", "s1", "s2"))
    i57 = enumerate_cosets(pres, words).index
    i3420 = enumerate_cosets(pres, ()).index
    ok = i57 == 57 and i3420 == 3420
    assert announce(2, "second-factor enumeration", ok,
                    f"facet index={i57} trivial index={i3420}, target <10s", t0)


def test_c03_index20_enumeration(universe):
    t0 = time.time()
    pres = universe.w_presentation
    words = tuple(
        Word.parse(t, pres.alphabet)
        for t in ("s2 s1", "(s0 s1)^2 s2 s3 s0", "s0 s1 s0 s3 s2 s3 s1")
    )
    table = enumerate_cosets(pres, words)
    asg = coset_action(table)  # re-verifies every relator against the action
    order = build_chain(asg.perms).order
    relators_hold = all(
        evaluate_word(r, asg).is_identity() for r in pres.all_relators()
    )
    omega_in_kernel = evaluate_word(OMEGA_WORD, asg).is_identity()
    ok = table.index == 20 and order == 3420 and relators_hold and omega_in_kernel
    assert announce(3, "index-20 subgroup enumeration", ok,
                    f"index={table.index} order={order} "
                    f"kernel-has-facet-involution={omega_in_kernel}, target <30s", t0)


def test_c04_assembly_order(universe):
    t0 = time.time()
    order = universe.w_chain.order
    ok = order == W_ORDER == 3420 * 175_560
    assert announce(4, "product assembly order", ok,
                    f"order={order}, target <2min", t0)


def test_c05_cgroup(universe):
    t0 = time.time()
    mg = universe.w_marked
    verdict = mg.intersection_property()
    orders = (
        mg.parabolic({0, 1, 2}).order,
        mg.parabolic({1, 2, 3}).order,
        mg.parabolic({0, 2, 3}).order,
        mg.parabolic({0, 1, 3}).order,
        mg.parabolic({1, 2}).order,
        mg.parabolic({0, 1}).order,
        mg.parabolic({2, 3}).order,
    )
    ok = verdict.ok and orders == (120, 60, 20, 20, 6, 10, 10) \
        and mg.schlafli_symbol() == [5, 3, 5]
    assert announce(5, "string C-group verification", ok,
                    f"intersection={verdict.ok} parabolics={orders}, target <1min", t0)


def test_c06_l_subgroup(universe):
    t0 = time.time()
    x = universe.eval_s(X_TEXT)
    y = universe.eval_s(Y_TEXT)
    # x and y derive from the three index-20 subgroup generators
    x1 = universe.eval_s("s2 s1")
    x2 = universe.eval_s("(s0 s1)^2 s2 s3 s0")
    x3 = universe.eval_s("s0 s1 s0 s3 s2 s3 s1")
    assert x == x2.inverse() * x3 * x1
    assert y == x1 * x3.inverse()
    rels = (y**3).is_identity() and (
        x * y * x * y.inverse() * x * y * x.inverse() * y * x
    ).is_identity()
    order = build_chain([x, y]).order
    ok = rels and order == 30_020_760
    assert announce(6, "two-generator subgroup verification", ok,
                    f"relators={rels} order={order}, target <2min", t0)


def test_c07_identities(universe):
    t0 = time.time()
    omega, nu = universe.omega, universe.nu
    v_words(universe)  # re-verifies the defining chain identities
    ok = (
        (omega * omega).is_identity()
        and not omega.is_identity()
        and all(omega * g == g * omega for g in universe.w_gens[:3])
        and (nu**6).is_identity()
        and not (nu**3).is_identity()
    )
    assert announce(7, "facet involution identities", ok,
                    "omega^2=1 central, nu^6=1, nu^3!=1, target <1s", t0)


def test_c08_first_factor_element_orders(universe):
    t0 = time.time()
    words = [
        ("s1 s2", 3),
        ("s0 s1", 5),
        ("s3 s1 s2 s1 s0", 19),
        ("s3 s2 s1 s0 s1 s0", 11),
        ("s1 s3 s2 s1 s3 s0 s1 s0 s2 s1 s0", 7),
    ]
    orders_ok = all(universe.eval_j1(t).order() == want for t, want in words)
    omega1 = universe.split(universe.omega)[0]
    orbit = conjugacy_orbit(omega1, universe.j1_chain)
    involutions = sum(
        1 for e in universe.j1_chain.elements(cap=200_000) if e.order() == 2
    )
    ok = orders_ok and orbit.orbit_size == involutions
    assert announce(8, "first-factor element orders", ok,
                    f"orders ok={orders_ok}, involution class {orbit.orbit_size} "
                    f"covers all {involutions}, target <1min", t0)


def test_c09_semisparse_suite(universe):
    t0 = time.time()
    failing = []
    for row in table1_catalog():
        sub = realize(row.spec(), universe)
        assert sub.order == row.order, f"row {row.row} order mismatch"
        verdict = is_semisparse(sub, universe)
        if not verdict.ok:
            assert verify_witness(verdict.witness, universe), \
                f"row {row.row}: invalid witness"
            failing.append(row.row)
    negatives_ok = True
    for name in ("s0", "s1", "s2", "s3", "nu"):
        verdict = is_semisparse(builtin_spec(name, universe), universe)
        negatives_ok &= (not verdict.ok) and verify_witness(verdict.witness, universe)
    ok = not failing and negatives_ok
    announce(9, "semisparse suite", ok,
             f"30 rows checked, negatives ok={negatives_ok}, "
             f"criterion-failing rows={failing} (each with a machine-verified "
             f"witness; see notes), target <30min", t0)
    assert negatives_ok
    assert not failing, (
        f"rows {failing} do not satisfy the semisparse criterion as stated; "
        "the witnesses are explicit and re-verified (an element of the "
        "subgroup conjugates into the product set outside the allowed pair), "
        "and a semantic section-collapse probe corroborates the verdicts -- "
        "see test_semisparse.py and the repository notes"
    )


def test_c10_census_suite(universe):
    t0 = time.time()
    space = face_space(universe, 3)
    expected = {
        "trivial": (5_003_460, 0),
        "omega": (2_500_020, 3_420),
        "nu3": (2_501_730, 0),
        "nu2": (1_667_820, 0),
        "n-doubleprime": (0, 57),
        "n-prime": (1_463, 0),
    }
    results = {}
    ok = True
    for name, (want_d, want_h) in expected.items():
        sub = realize(builtin_spec(name, universe), universe)
        census = orbit_census(space, sub)
        conserved = (
            2 * census.full_orbits * sub.order + census.half_orbits * sub.order
            == 2 * 5_003_460
        )
        results[name] = (census.full_orbits, census.half_orbits)
        ok &= results[name] == (want_d, want_h) and conserved
    assert announce(10, "census suite", ok,
                    f"{results}, target <10min", t0)


def test_c11_aut_orders(universe):
    t0 = time.time()
    expected = {
        "n-doubleprime": 3_420,
        "n-prime": 175_560,
        "omega": 205_200,
        "nu3": 1_755_600,
        "nu2": 68_400,  # decides which of the two order-3 census rows nu2 is
        "trivial": 600_415_200,
    }
    results = {}
    ok = True
    for name, want in expected.items():
        sub = realize(builtin_spec(name, universe), universe)
        res = normalizer_via_orbit(sub.perms, universe.w_chain, max_orbit=600_000)
        aut = res.normalizer_order // max(sub.order, 1)
        results[name] = aut
        ok &= aut == want
    # one catalog row with a tractable conjugate orbit (the full sweep of all
    # tractable rows runs under the CLI --extended flag)
    row7 = next(r for r in table1_catalog() if r.row == 7)
    sub = realize(row7.spec(), universe)
    res = normalizer_via_orbit(sub.perms, universe.w_chain, max_orbit=600_000)
    aut7 = res.normalizer_order // sub.order
    results["table1:7"] = aut7
    ok &= aut7 == 21  # census row 7: 7:3
    assert announce(11, "automorphism-group orders", ok,
                    f"{results}, full tractable sweep under --extended <60min", t0)


def test_c12_desk_scale_statement(universe):
    t0 = time.time()
    # stated explicitly: the exhaustive conjugacy-class enumeration (and with
    # it completeness certification of the census) is not reproducible at
    # desk scale; downward-closure samples substitute
    tested = 0
    ok = True
    for row in table1_catalog():
        if row.row not in (48, 54, 64):
            continue
        sub = realize(row.spec(), universe)
        assert is_semisparse(sub, universe).ok
        for k, (w, p) in enumerate(zip(sub.words, sub.perms)):
            from polytope535.subgroups import RealizedSubgroup, SubgroupSpec

            word = (w**2).free_reduce()
            perm = p**2
            small = RealizedSubgroup(
                SubgroupSpec(f"c12-{row.row}-{k}", (word,)),
                (perm,),
                build_chain([perm], 1483),
            )
            ok &= is_semisparse(small, universe).ok
            tested += 1
    print("\nNOT REPRODUCIBLE AT DESK SCALE: the exhaustive enumeration of "
          "all subgroup conjugacy classes of the full group, and therefore "
          "completeness certification of the census; substituted by the "
          "property suites plus downward-closure tests above.")
    assert announce(12, "desk-scale substitute checks", ok and tested >= 6,
                    f"{tested} subgroups of verified rows re-verified semisparse", t0)
