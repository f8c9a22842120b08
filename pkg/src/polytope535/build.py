"""Assembly of the working universe: factor representations, the 1483-point
permutation model of the full group, named words, and builtin subgroups.

The first factor acts on the 1463 cosets of the facet parabolic in the
first-factor quotient (derived by coset enumeration); the second factor is
the bundled 20-point representation. The generators of the full group are
the blockwise products, acting on 1463 + 20 = 1483 points.

Everything heavy is built lazily and, when a cache directory is configured,
persisted there keyed by content hashes, so repeated CLI runs skip the
construction.
"""
from __future__ import annotations

import os
from functools import cached_property
from importlib import resources
from pathlib import Path

import numpy as np

from .cgroup import MarkedGroup, facet_central_involution
from .coset_enum import CosetTable, Presentation, coset_action, enumerate_cosets
from .errors import VerificationError
from .perms import (
    S_ALPHABET,
    GeneratorAssignment,
    Permutation,
    Word,
    embed_direct_product,
    evaluate_word,
    parse_cycles,
    split_product,
)
from .stabchain import StabilizerChain, build_chain, normal_closure

__all__ = ["Universe", "get_universe", "FactorGroup", "data_text"]

CACHE_VERSION = "1"
J1_DEGREE = 1463
FACTOR2_DEGREE = 20
W_DEGREE = J1_DEGREE + FACTOR2_DEGREE
W_ORDER = 600_415_200
J1_ORDER = 175_560
L219_ORDER = 3_420
L_ORDER = 30_020_760


def data_text(name: str) -> str:
    return resources.files("polytope535.data").joinpath(name).read_text()


def load_presentation(name: str) -> Presentation:
    return Presentation.parse(data_text(f"{name}.pres"), name=name)


def load_words(name: str, alphabet) -> tuple[Word, ...]:
    out = []
    for line in data_text(name).splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            out.append(Word.parse(line, alphabet))
    return tuple(out)


def s_word(text: str) -> Word:
    return Word.parse(text, S_ALPHABET)


OMEGA_WORD = s_word("(s0 s1 s2)^5")
NU_WORD = s_word("(s0 s1 s2)^5 s3")

# closed forms derived uniquely from the defining chain
# v6 = v5 s0 = v4 s1 s0 = v3 s0 s1 s0 = v2 (s1 s0)^2, with v1 = nu, v2 = v1 s2
V_WORDS_S: tuple[Word, ...] = (
    NU_WORD,
    s_word("(s0 s1 s2)^5 s3 s2"),
    s_word("(s0 s1 s2)^5 s3 s2 s1"),
    s_word("(s0 s1 s2)^5 s3 s2 s1 s0"),
    s_word("(s0 s1 s2)^5 s3 s2 s1 s0 s1"),
    s_word("(s0 s1 s2)^5 s3 s2 s1 s0 s1 s0"),
)

X_WORD = s_word("s0 s3 s2 s1 s0 s1 s0  s0 s1 s0 s3 s2 s3 s1  s2 s1").free_reduce()
Y_WORD = s_word("s2 s1  s1 s3 s2 s3 s0 s1 s0").free_reduce()


class FactorGroup:
    """The second factor with full lookup tables over its 3420 elements.

    Element indices follow the deterministic BFS order from the identity;
    `mult[i, j]` is the index of element_i * element_j (left-to-right),
    `inv[i]` the index of the inverse, and `class_id` a conjugacy class
    labelling computed by orbit sweeps over the multiplication table.
    """

    def __init__(self, gens: tuple[Permutation, ...]):
        self.gens = gens
        degree = gens[0].degree
        self._degree = degree
        self.chain = build_chain(gens, degree)
        order = self.chain.order
        base = np.fromiter(self.chain.base, dtype=np.int64)
        self._base = base
        elems: list[np.ndarray] = [np.arange(degree, dtype=np.int16)]
        seen: set[bytes] = {elems[0][base].tobytes()}
        qi = 0
        garr = [g.images for g in gens]
        while qi < len(elems):
            cur = elems[qi]
            qi += 1
            for g in garr:
                nxt = g[cur].astype(np.int16)
                key = nxt[base].tobytes()
                if key not in seen:
                    seen.add(key)
                    elems.append(nxt)
        if len(elems) != order:
            raise VerificationError("factor group enumeration mismatch")
        E = np.vstack(elems)
        self.elements = E
        # dense base-image-code -> element-index lookup
        lookup = np.full(degree ** len(base), -1, dtype=np.int32)
        lookup[self._key_codes(E[:, base])] = np.arange(order, dtype=np.int32)
        self._lookup = lookup
        # mult[i] = indices of element_i * every element: (e_i*e_j)[b] = e_j[e_i[b]]
        mult = np.empty((order, order), dtype=np.int16)
        for i in range(order):
            mult[i] = lookup[self._key_codes(E[:, E[i][base]])]
        self.mult = mult
        inv_rows = np.argsort(E, axis=1)
        self.inv = lookup[self._key_codes(inv_rows[:, base])].astype(np.int16)
        self.gen_idx = np.array([self.idx_of(g) for g in gens], dtype=np.int16)
        self.class_id, self.class_count = self._classes()

    def _key_codes(self, keymat: np.ndarray) -> np.ndarray:
        """Pack base-image rows (n, len(base)) into dense integer codes."""
        code = np.zeros(keymat.shape[0], dtype=np.int64)
        for k in range(keymat.shape[1]):
            code = code * self._degree + keymat[:, k]
        return code

    @property
    def order(self) -> int:
        return self.chain.order

    @property
    def degree(self) -> int:
        return self._degree

    def idx_of(self, p: Permutation) -> int:
        code = 0
        for b in self._base:
            code = code * self._degree + int(p.images[b])
        got = int(self._lookup[code])
        if got < 0:
            raise ValueError("permutation is not in the factor group")
        return got

    def perm_of(self, idx: int) -> Permutation:
        return Permutation(self.elements[idx].astype(np.int32), _checked=True)

    def _classes(self) -> tuple[np.ndarray, int]:
        order = self.order
        class_id = np.full(order, -1, dtype=np.int16)
        mult = self.mult
        inv = self.inv
        gidx = [int(i) for i in self.gen_idx]
        ginv = [int(inv[i]) for i in gidx]
        cid = 0
        for start in range(order):
            if class_id[start] >= 0:
                continue
            stack = [start]
            class_id[start] = cid
            while stack:
                x = stack.pop()
                for g, gi in zip(gidx, ginv):
                    y = int(mult[int(mult[gi, x]), g])
                    if class_id[y] < 0:
                        class_id[y] = cid
                        stack.append(y)
            cid += 1
        return class_id, cid


class Universe:
    """Lazily built shared state: factor representations, the full group,
    marked groups, parabolic chains, kernels, and named words."""

    def __init__(self, cache_dir: str | os.PathLike | None = None):
        self.cache_dir = Path(cache_dir) if cache_dir else None
        if self.cache_dir:
            self.cache_dir.mkdir(parents=True, exist_ok=True)

    # -- presentations -------------------------------------------------------

    @cached_property
    def w_presentation(self) -> Presentation:
        return load_presentation("w")

    @cached_property
    def w_prime_presentation(self) -> Presentation:
        return load_presentation("w_prime")

    @cached_property
    def w_doubleprime_presentation(self) -> Presentation:
        return load_presentation("w_doubleprime")

    @cached_property
    def l_xy_presentation(self) -> Presentation:
        return load_presentation("l_xy")

    # -- factor representations ----------------------------------------------

    def _parabolic_words(self, omit: int) -> tuple[Word, ...]:
        return tuple(
            Word.gen(S_ALPHABET, i) for i in range(4) if i != omit
        )

    def j1_coset_table(self, omit: int = 3) -> CosetTable:
        """Standardized table of the first-factor quotient over a maximal
        parabolic; `omit` selects the face rank."""
        return enumerate_cosets(
            self.w_prime_presentation, self._parabolic_words(omit)
        )

    @cached_property
    def j1_assignment(self) -> GeneratorAssignment:
        asg = coset_action(self.j1_coset_table(3))
        if asg.degree != J1_DEGREE:
            raise VerificationError(f"first factor degree {asg.degree} != {J1_DEGREE}")
        return asg

    @cached_property
    def j1_chain(self) -> StabilizerChain:
        chain = self._cached_chain("j1", self.j1_assignment.perms)
        if chain.order != J1_ORDER:
            raise VerificationError(f"first factor order {chain.order} != {J1_ORDER}")
        return chain

    @cached_property
    def l219_perms(self) -> tuple[Permutation, ...]:
        out = []
        for line in data_text("l219_points20.txt").splitlines():
            line = line.split("#", 1)[0].strip()
            if line:
                out.append(parse_cycles(line, FACTOR2_DEGREE))
        if len(out) != 4:
            raise VerificationError("expected four 20-point generator images")
        return tuple(out)

    @cached_property
    def factor2(self) -> FactorGroup:
        fg = FactorGroup(self.l219_perms)
        if fg.order != L219_ORDER:
            raise VerificationError(f"second factor order {fg.order} != {L219_ORDER}")
        return fg

    # -- the full group ------------------------------------------------------

    @cached_property
    def w_gens(self) -> tuple[Permutation, ...]:
        return tuple(
            embed_direct_product(a, b)
            for a, b in zip(self.j1_assignment.perms, self.l219_perms)
        )

    @cached_property
    def w_assignment(self) -> GeneratorAssignment:
        return GeneratorAssignment(S_ALPHABET, self.w_gens)

    @cached_property
    def w_chain(self) -> StabilizerChain:
        chain = self._cached_chain("w", self.w_gens)
        if chain.order != W_ORDER:
            raise VerificationError(f"full group order {chain.order} != {W_ORDER}")
        return chain

    @cached_property
    def w_marked(self) -> MarkedGroup:
        return MarkedGroup("w", self.w_gens, self.w_chain)

    @cached_property
    def w_doubleprime_marked(self) -> MarkedGroup:
        return MarkedGroup("w-doubleprime", self.l219_perms, self.factor2.chain)

    @cached_property
    def w_prime_marked(self) -> MarkedGroup:
        return MarkedGroup("w-prime", self.j1_assignment.perms, self.j1_chain)

    def marked_group(self, name: str) -> MarkedGroup:
        table = {
            "w": lambda: self.w_marked,
            "w-prime": lambda: self.w_prime_marked,
            "w-doubleprime": lambda: self.w_doubleprime_marked,
        }
        if name not in table:
            raise ValueError(f"unknown group {name!r} (expected w, w-prime, w-doubleprime)")
        return table[name]()

    def eval_s(self, word: Word | str) -> Permutation:
        if isinstance(word, str):
            word = s_word(word)
        return evaluate_word(word, self.w_assignment)

    def eval_j1(self, word: Word | str) -> Permutation:
        if isinstance(word, str):
            word = s_word(word)
        return evaluate_word(word, self.j1_assignment)

    def split(self, p: Permutation) -> tuple[Permutation, Permutation]:
        return split_product(p, J1_DEGREE)

    @cached_property
    def omega(self) -> Permutation:
        w = facet_central_involution(self.w_marked)
        if w != self.eval_s(OMEGA_WORD):
            raise VerificationError("facet involution disagrees with its word")
        return w

    @cached_property
    def nu(self) -> Permutation:
        return self.eval_s(NU_WORD)

    def parabolic_chain(self, omit: int) -> StabilizerChain:
        return self.w_marked.maximal_parabolic(omit)

    # -- kernels of the two quotients ----------------------------------------

    @cached_property
    def n_prime(self) -> tuple[tuple[Word, ...], StabilizerChain]:
        """Normal closure of nu^3: the kernel of the first-factor quotient."""
        words, gens, chain = normal_closure(
            [NU_WORD**3],
            [self.nu**3],
            self.w_gens,
            [Word.gen(S_ALPHABET, i) for i in range(4)],
        )
        if chain.order != L219_ORDER:
            raise VerificationError("first kernel has the wrong order")
        return tuple(words), chain

    @cached_property
    def n_doubleprime(self) -> tuple[tuple[Word, ...], StabilizerChain]:
        """Normal closure of omega: the kernel of the second-factor quotient."""
        words, gens, chain = normal_closure(
            [OMEGA_WORD],
            [self.omega],
            self.w_gens,
            [Word.gen(S_ALPHABET, i) for i in range(4)],
        )
        if chain.order != J1_ORDER:
            raise VerificationError("second kernel has the wrong order")
        return tuple(words), chain

    # -- chain caching --------------------------------------------------------

    def _cached_chain(self, tag: str, gens) -> StabilizerChain:
        if not self.cache_dir:
            return build_chain(gens)
        key = StabilizerChain.cache_key(gens)
        path = self.cache_dir / f"{tag}-{CACHE_VERSION}-{key[:16]}.chain"
        if path.exists():
            try:
                return StabilizerChain.load(path)
            except Exception:
                path.unlink(missing_ok=True)
        chain = build_chain(gens)
        tmp = path.with_suffix(".tmp")
        chain.save(tmp)
        tmp.replace(path)
        return chain


_UNIVERSE: Universe | None = None


def get_universe(cache_dir: str | os.PathLike | None = None) -> Universe:
    """Process-wide shared universe (tests and the CLI reuse one build)."""
    global _UNIVERSE
    if _UNIVERSE is None:
        env_dir = os.environ.get("POLYTOPE535_CACHE_DIR")
        _UNIVERSE = Universe(cache_dir or env_dir)
    return _UNIVERSE
