"""Word-generated subgroup specifications and their realizations.

A SubgroupSpec names a subgroup by generator words over the s-alphabet
(possibly with a provenance string and an expected order); realizing it
evaluates the words in the 1483-point model and builds a stabilizer chain.
Realizations are cached per universe under the spec name.
"""
from __future__ import annotations

from dataclasses import dataclass

from .build import NU_WORD, OMEGA_WORD, Universe
from .errors import VerificationError
from .perms import S_ALPHABET, Permutation, Word
from .stabchain import StabilizerChain, build_chain

__all__ = ["SubgroupSpec", "RealizedSubgroup", "realize", "builtin_spec", "BUILTIN_NAMES"]


@dataclass(frozen=True)
class SubgroupSpec:
    """A subgroup of the full group given by generator words."""

    name: str
    s_words: tuple[Word, ...]
    expected_order: int | None = None
    label: str | None = None
    source: str | None = None

    def __post_init__(self):
        for w in self.s_words:
            if w.alphabet != S_ALPHABET:
                raise ValueError("subgroup words must be over the s-alphabet")


@dataclass
class RealizedSubgroup:
    spec: SubgroupSpec
    perms: tuple[Permutation, ...]
    chain: StabilizerChain

    @property
    def name(self) -> str:
        return self.spec.name

    @property
    def order(self) -> int:
        return self.chain.order

    @property
    def words(self) -> tuple[Word, ...]:
        return self.spec.s_words


def realize(spec: SubgroupSpec, universe: Universe, *, check_expected: bool = True) -> RealizedSubgroup:
    cache = getattr(universe, "_subgroup_cache", None)
    if cache is None:
        cache = universe._subgroup_cache = {}
    got = cache.get(spec)
    if got is None:
        perms = tuple(universe.eval_s(w) for w in spec.s_words)
        chain = build_chain(perms, degree=universe.w_gens[0].degree)
        got = RealizedSubgroup(spec, perms, chain)
        cache[spec] = got
    if check_expected and spec.expected_order is not None and got.order != spec.expected_order:
        raise VerificationError(
            f"subgroup {spec.name!r}: realized order {got.order} "
            f"!= expected {spec.expected_order}"
        )
    return got


def _builtin_table(universe: Universe) -> dict[str, SubgroupSpec]:
    table: dict[str, SubgroupSpec] = {
        "trivial": SubgroupSpec("trivial", (), expected_order=1),
        "omega": SubgroupSpec("omega", (OMEGA_WORD,), expected_order=2),
        "nu": SubgroupSpec("nu", (NU_WORD,), expected_order=6),
        "nu2": SubgroupSpec("nu2", (NU_WORD**2,), expected_order=3),
        "nu3": SubgroupSpec("nu3", (NU_WORD**3,), expected_order=2),
    }
    for i in range(4):
        table[f"s{i}"] = SubgroupSpec(f"s{i}", (Word.gen(S_ALPHABET, i),), expected_order=2)
    for omit, order in zip(range(4), (60, 20, 20, 120)):
        words = tuple(Word.gen(S_ALPHABET, i) for i in range(4) if i != omit)
        table[f"h{omit}"] = SubgroupSpec(f"h{omit}", words, expected_order=order)
    np_words, np_chain = universe.n_prime
    table["n-prime"] = SubgroupSpec(
        "n-prime", tuple(np_words), expected_order=np_chain.order, label="L_2(19)"
    )
    nd_words, nd_chain = universe.n_doubleprime
    table["n-doubleprime"] = SubgroupSpec(
        "n-doubleprime", tuple(nd_words), expected_order=nd_chain.order, label="J_1"
    )
    return table


BUILTIN_NAMES = (
    "trivial", "omega", "nu", "nu2", "nu3",
    "s0", "s1", "s2", "s3", "h0", "h1", "h2", "h3",
    "n-prime", "n-doubleprime",
)


def builtin_spec(name: str, universe: Universe) -> SubgroupSpec:
    table = getattr(universe, "_builtin_specs", None)
    if table is None:
        table = universe._builtin_specs = _builtin_table(universe)
    if name not in table:
        raise ValueError(f"unknown builtin subgroup {name!r}; choose from {BUILTIN_NAMES}")
    return table[name]
