import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polytope535.errors import (
    CycleFormatError,
    DegreeMismatchError,
    UnassignedGeneratorError,
    WordSyntaxError,
)
from polytope535.perms import (
    S_ALPHABET,
    V_ALPHABET,
    XY_ALPHABET,
    GeneratorAssignment,
    Permutation,
    Word,
    element_order,
    embed_direct_product,
    evaluate_word,
    parse_cycles,
    split_product,
)

# The 20-point images of the four involutory generators, used across the suite
# as a fixed known-good input corpus.
S20_CYCLES = [
    "(1,2)(3,6)(4,7)(5,10)(8,14)(9,15)(11,19)(12,16)(13,17)(18,20)",
    "(1,3)(2,5)(4,8)(6,13)(7,12)(9,17)(10,15)(11,18)(14,19)(16,20)",
    "(1,3)(2,6)(4,9)(5,11)(7,15)(8,16)(10,19)(12,14)(13,18)(17,20)",
    "(1,4)(2,7)(3,8)(5,12)(6,14)(9,18)(10,16)(11,17)(13,19)(15,20)",
]


@pytest.fixture(scope="module")
def s20():
    return [parse_cycles(c, 20) for c in S20_CYCLES]


def random_perm(rng: np.random.Generator, degree: int) -> Permutation:
    return Permutation(rng.permutation(degree).astype(np.int32), _checked=True)


# ---------------------------------------------------------------------------
# parsing / formatting
# ---------------------------------------------------------------------------


def test_parse_s20_roundtrip(s20):
    for text, p in zip(S20_CYCLES, s20):
        assert p.cycle_string() == text
        assert parse_cycles(p.cycle_string(), 20) == p


def test_parse_empty_is_identity():
    assert parse_cycles("", 5) == Permutation.identity(5)


def test_parse_whitespace_tolerant():
    a = parse_cycles(" ( 1 , 2 )  (3,6) ", 6)
    b = parse_cycles("(1,2)(3,6)", 6)
    assert a == b


def test_parse_repeated_point_rejected():
    with pytest.raises(CycleFormatError) as err:
        parse_cycles("(1,2)(1,3)", 3)
    assert "repeated" in str(err.value)
    assert err.value.position == 6


def test_parse_point_out_of_range():
    with pytest.raises(CycleFormatError) as err:
        parse_cycles("(1,7)", 5)
    assert "out of range" in str(err.value)


@pytest.mark.parametrize("bad", ["(1,2", "1,2)", "(,2)", "(1 2)", "(1,2)x"])
def test_parse_malformed(bad):
    with pytest.raises(CycleFormatError):
        parse_cycles(bad, 9)


def test_format_sorts_by_least_moved_point():
    p = parse_cycles("(5,6)(1,3,2)", 6)
    assert p.cycle_string() == "(1,3,2)(5,6)"


# ---------------------------------------------------------------------------
# group laws
# ---------------------------------------------------------------------------


@given(st.integers(1, 60), st.randoms(use_true_random=False))
@settings(max_examples=60, deadline=None)
def test_group_laws(degree, pyrandom):
    rng = np.random.Generator(np.random.PCG64(pyrandom.getrandbits(32)))
    p, q, r = (random_perm(rng, degree) for _ in range(3))
    assert (p * q) * r == p * (q * r)
    assert p * p.inverse() == Permutation.identity(degree)
    assert (p * q).inverse() == q.inverse() * p.inverse()


def test_mixed_degree_rejected():
    with pytest.raises(DegreeMismatchError):
        Permutation.identity(3) * Permutation.identity(4)


def test_power_matches_repeated_product():
    p = parse_cycles("(1,2,3,4,5)(6,7)", 8)
    acc = Permutation.identity(8)
    for k in range(12):
        assert p**k == acc
        acc = acc * p
    assert p**-3 == (p.inverse()) ** 3


# ---------------------------------------------------------------------------
# orders / cycle structure
# ---------------------------------------------------------------------------


def test_element_order_identity():
    assert element_order(Permutation.identity(7)) == 1


def test_element_order_s20_generators(s20):
    for p in s20:
        assert element_order(p) == 2


def test_order_is_lcm_of_cycle_lengths():
    p = parse_cycles("(1,2,3)(4,5)(6,7,8,9,10,11,12)", 12)
    assert element_order(p) == math.lcm(3, 2, 7)
    assert p.cycle_type() == ((2, 1), (3, 1), (7, 1))


# ---------------------------------------------------------------------------
# direct-product embedding
# ---------------------------------------------------------------------------


def test_embed_identities():
    e = embed_direct_product(Permutation.identity(4), Permutation.identity(6))
    assert e == Permutation.identity(10)


def test_embed_blocks_and_split():
    p = parse_cycles("(1,2,3)", 3)
    q = parse_cycles("(1,2)", 2)
    e = embed_direct_product(p, q)
    assert e.cycle_string() == "(1,2,3)(4,5)"
    back_p, back_q = split_product(e, 3)
    assert back_p == p and back_q == q


@given(st.integers(2, 25), st.integers(2, 25), st.randoms(use_true_random=False))
@settings(max_examples=40, deadline=None)
def test_embed_order_is_lcm(m, n, pyrandom):
    rng = np.random.Generator(np.random.PCG64(pyrandom.getrandbits(32)))
    p, q = random_perm(rng, m), random_perm(rng, n)
    e = embed_direct_product(p, q)
    # independent oracle: brute-force powering
    k, acc = 1, e
    while not acc.is_identity():
        acc = acc * e
        k += 1
    assert k == math.lcm(element_order(p), element_order(q))
    assert element_order(e) == k


# ---------------------------------------------------------------------------
# words
# ---------------------------------------------------------------------------


def test_word_parse_and_str():
    w = Word.parse("(s0 s1 s2)^5 s3", S_ALPHABET)
    assert len(w) == 16
    assert str(Word.parse("s0 s1^2", S_ALPHABET)) == "s0 s1^2"


def test_word_parse_rejects_dangling_exponent():
    with pytest.raises(WordSyntaxError):
        Word.parse("s0 s1 s2 ^5", S_ALPHABET)


@pytest.mark.parametrize("bad", ["(s0 s1", "s0)", "t0", "s0^", "s0 %"])
def test_word_parse_malformed(bad):
    with pytest.raises(WordSyntaxError):
        Word.parse(bad, S_ALPHABET)


def test_word_parse_inverse_exponents():
    w = Word.parse("x y^-1 x^2", XY_ALPHABET)
    assert w.letters == ((0, 1), (1, -1), (0, 1), (0, 1))


def test_empty_word_is_concat_identity():
    w = Word.parse("v1 v2", V_ALPHABET)
    e = Word.identity(V_ALPHABET)
    assert e * w == w and w * e == w


def test_free_reduction_involutory():
    w = Word.parse("s0 s1 s1 s0 s2", S_ALPHABET)
    assert str(w.free_reduce()) == "s2"


def test_free_reduction_with_inverses():
    w = Word.parse("x y y^-1 x^-1 y", XY_ALPHABET)
    assert w.free_reduce().letters == ((1, 1),)


def test_substitute_v_into_s():
    v1 = Word.parse("(s0 s1 s2)^5 s3", S_ALPHABET)
    v2 = v1 * Word.gen(S_ALPHABET, 2)
    table = [v1, v2] + [Word.identity(S_ALPHABET)] * 4
    w = Word.parse("v1^-1 v2", V_ALPHABET).substitute(table)
    assert w.free_reduce().letters == ((2, 1),)  # v1^-1 v2 == s2


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------


def test_evaluate_relators_hold_in_s20(s20):
    asg = GeneratorAssignment(S_ALPHABET, tuple(s20))
    for text in ["(s0 s1)^5", "(s1 s2)^3", "(s2 s3)^5", "(s0 s2)^2", "(s0 s3)^2",
                 "(s1 s3)^2", "(s1 s2 s3)^5", "(s0 s1 s2)^5"]:
        w = Word.parse(text, S_ALPHABET)
        assert evaluate_word(w, asg).is_identity(), text


def test_evaluate_empty_word(s20):
    asg = GeneratorAssignment(S_ALPHABET, tuple(s20))
    assert evaluate_word(Word.identity(S_ALPHABET), asg).is_identity()


def test_evaluate_left_to_right_convention():
    # fixed vector pinning the application order: s0 then s1
    a = parse_cycles("(1,2)", 3)
    b = parse_cycles("(2,3)", 3)
    asg = GeneratorAssignment(
        Alphabet := S_ALPHABET, (a, b, Permutation.identity(3), Permutation.identity(3))
    )
    w = Word.parse("s0 s1", Alphabet)
    # point 1 -> s0 -> 2 -> s1 -> 3
    assert evaluate_word(w, asg)(0) == 2


def test_evaluate_wrong_alphabet_rejected(s20):
    asg = GeneratorAssignment(S_ALPHABET, tuple(s20))
    with pytest.raises(UnassignedGeneratorError):
        evaluate_word(Word.parse("x y", XY_ALPHABET), asg)


def test_assignment_degree_mismatch_rejected():
    with pytest.raises(DegreeMismatchError):
        GeneratorAssignment(
            XY_ALPHABET, (Permutation.identity(3), Permutation.identity(4))
        )


@given(st.randoms(use_true_random=False))
@settings(max_examples=30, deadline=None)
def test_evaluate_respects_free_reduction(pyrandom):
    rng = np.random.Generator(np.random.PCG64(pyrandom.getrandbits(32)))
    perms = tuple(random_perm(rng, 12) for _ in range(2))
    asg = GeneratorAssignment(XY_ALPHABET, perms)
    letters = tuple(
        (pyrandom.randrange(2), pyrandom.choice((1, -1))) for _ in range(12)
    )
    w = Word(XY_ALPHABET, letters)
    assert evaluate_word(w, asg) == evaluate_word(w.free_reduce(), asg)
