"""The semisparse-subgroup machinery.

A subgroup N of the full group yields a polytope quotient exactly when every
conjugate of N meets the product set S = H0 * H3 inside {1, omega}. The
checker implements the elementwise equivalent: N is semisparse iff for every
nonidentity n in N the conjugacy class of n meets S at most in omega. (The
equivalence is immediate: an element of N^w in S \\ {1, omega} is exactly a
pair (n, s), s in the class of n; conjugating back moves s into N^w, and
conversely.)

Conjugacy in the product group is tested factorwise. The second factor has
its full class partition precomputed; the first factor uses cached
conjugation-orbit key sets, computed at most once per class that is actually
hit, behind an (element order, second-factor class) prefilter plus a
first-factor cycle-type filter that make exact tests rare.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from io import StringIO

from .build import V_WORDS_S, Universe, data_text
from .errors import EnumerationCapExceeded, SchemaError, VerificationError
from .perms import V_ALPHABET, Permutation, Word
from .stabchain import StabilizerChain, build_chain, conjugacy_orbit
from .subgroups import RealizedSubgroup, SubgroupSpec, realize

__all__ = [
    "ProductSet",
    "product_set_h0h3",
    "SemisparseVerdict",
    "is_semisparse",
    "VWordTable",
    "v_words",
    "Table1Row",
    "table1_catalog",
    "StructureFingerprint",
    "structure_fingerprint",
]


# ---------------------------------------------------------------------------
# the reference set S = H0 * H3
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProductSetEntry:
    perm: Permutation
    order: int
    ct1: tuple  # cycle type of the first-factor part
    b_idx: int  # second-factor element index
    b_class: int
    is_identity: bool
    is_omega: bool


@dataclass
class ProductSet:
    entries: tuple[ProductSetEntry, ...]
    prefilter: dict[tuple[int, int], tuple[int, ...]]  # (order, b_class) -> entry ids

    def __len__(self) -> int:
        return len(self.entries)


def product_set_h0h3(universe: Universe) -> ProductSet:
    """Materialize S = {h0 * h3} with exact deduplication.

    Verified to contain the identity, the facet involution, and every mark.
    """
    cached = getattr(universe, "_product_set", None)
    if cached is not None:
        return cached
    h0 = list(universe.parabolic_chain(0).elements(cap=1024))
    h3 = list(universe.parabolic_chain(3).elements(cap=1024))
    chain = universe.w_chain
    seen: dict[bytes, Permutation] = {}
    for a in h0:
        for b in h3:
            p = a * b
            seen.setdefault(chain.base_image_key(p), p)
    required = [Permutation.identity(universe.w_gens[0].degree), universe.omega, *universe.w_gens]
    for r in required:
        if chain.base_image_key(r) not in seen:
            raise VerificationError("product set is missing a required element")
    factor = universe.factor2
    omega_key = chain.base_image_key(universe.omega)
    entries = []
    prefilter: dict[tuple[int, int], list[int]] = {}
    for key in sorted(seen):
        p = seen[key]
        first, second = universe.split(p)
        b_idx = factor.idx_of(second)
        entry = ProductSetEntry(
            perm=p,
            order=p.order(),
            ct1=first.cycle_type(),
            b_idx=b_idx,
            b_class=int(factor.class_id[b_idx]),
            is_identity=p.is_identity(),
            is_omega=key == omega_key,
        )
        idx = len(entries)
        entries.append(entry)
        prefilter.setdefault((entry.order, entry.b_class), []).append(idx)
    ps = ProductSet(tuple(entries), {k: tuple(v) for k, v in prefilter.items()})
    universe._product_set = ps
    return ps


# ---------------------------------------------------------------------------
# first-factor conjugacy class cache
# ---------------------------------------------------------------------------


class _FirstFactorClasses:
    """Conjugation-orbit key sets in the first factor, computed on demand."""

    def __init__(self, universe: Universe):
        self.chain = universe.j1_chain
        self.classes: list[set[bytes]] = []

    def class_keys(self, p: Permutation) -> set[bytes]:
        key = self.chain.base_image_key(p)
        for cls in self.classes:
            if key in cls:
                return cls
        orbit = conjugacy_orbit(p, self.chain, want_keys=True)
        self.classes.append(orbit.keys)
        return orbit.keys

    def same_class(self, a: Permutation, b: Permutation) -> bool:
        return self.chain.base_image_key(a) in self.class_keys(b)


def _first_factor_classes(universe: Universe) -> _FirstFactorClasses:
    got = getattr(universe, "_j1_classes", None)
    if got is None:
        got = universe._j1_classes = _FirstFactorClasses(universe)
    return got


# ---------------------------------------------------------------------------
# the semisparse verdict
# ---------------------------------------------------------------------------


@dataclass
class SemisparseVerdict:
    ok: bool
    witness: tuple[Permutation, Permutation] | None = None  # (n, s) conjugate pair

    def __bool__(self) -> bool:
        return self.ok


def is_semisparse(
    sub: RealizedSubgroup | SubgroupSpec,
    universe: Universe,
    *,
    element_cap: int = 200_000,
) -> SemisparseVerdict:
    """Elementwise semisparseness test with a deterministic first witness.

    A failing verdict carries (n, s): n in N and s in S \\ {1, omega},
    conjugate in the full group (verified factorwise).
    """
    if isinstance(sub, SubgroupSpec):
        sub = realize(sub, universe)
    if sub.order > element_cap:
        raise EnumerationCapExceeded(
            f"subgroup of order {sub.order} exceeds the semisparse element cap",
            sub.order,
            element_cap,
        )
    s_set = product_set_h0h3(universe)
    factor = universe.factor2
    j1_classes = _first_factor_classes(universe)
    split = universe.split
    class_id = factor.class_id
    for n in sub.chain.elements(cap=element_cap):
        if n.is_identity():
            continue
        order = n.order()
        first, second = split(n)
        b_class = int(class_id[factor.idx_of(second)])
        candidates = s_set.prefilter.get((order, b_class))
        if not candidates:
            continue
        ct1 = first.cycle_type()
        for idx in candidates:
            entry = s_set.entries[idx]
            if entry.is_omega or entry.is_identity:
                continue
            if entry.ct1 != ct1:
                continue
            s_first, _ = split(entry.perm)
            if j1_classes.same_class(first, s_first):
                return SemisparseVerdict(False, (n, entry.perm))
    return SemisparseVerdict(True)


def verify_witness(
    witness: tuple[Permutation, Permutation], universe: Universe
) -> bool:
    """Confirm a failure witness: both parts conjugate factorwise and the
    S-side element outside {1, omega}."""
    n, s = witness
    if s.is_identity() or s == universe.omega:
        return False
    n1, n2 = universe.split(n)
    s1, s2 = universe.split(s)
    factor = universe.factor2
    if factor.class_id[factor.idx_of(n2)] != factor.class_id[factor.idx_of(s2)]:
        return False
    return _first_factor_classes(universe).same_class(n1, s1)


def conjugate_spot_check(
    sub: RealizedSubgroup, universe: Universe, conjugator_words: list[Word]
) -> Permutation | None:
    """Directly test the defining criterion on a sample of conjugators:
    returns an element of N^w inside S \\ {1, omega} if one is found.

    A regression guard on the elementwise reformulation, not a decision
    procedure (the sample is finite)."""
    s_set = product_set_h0h3(universe)
    chain = universe.w_chain
    s_keys = {
        chain.base_image_key(e.perm)
        for e in s_set.entries
        if not (e.is_identity or e.is_omega)
    }
    for w_word in conjugator_words:
        w = universe.eval_s(w_word)
        w_inv = w.inverse()
        for n in sub.chain.elements(cap=10_000):
            conj = w_inv * n * w
            if chain.base_image_key(conj) in s_keys:
                return conj
    return None


# ---------------------------------------------------------------------------
# the v-word generator scheme
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VWordTable:
    words: tuple[Word, ...]  # v1..v6 over the s-alphabet

    def __getitem__(self, i: int) -> Word:
        return self.words[i - 1]


def v_words(universe: Universe) -> VWordTable:
    """The six generator words, with the defining chain identities re-verified
    by permutation evaluation. Any failure signals a wrongly built group."""
    ev = universe.eval_s
    v = [ev(w) for w in V_WORDS_S]
    s = universe.w_gens
    checks = [
        ("v1 = omega * s3", v[0] == universe.omega * s[3]),
        ("v2 = v1 s2", v[1] == v[0] * s[2]),
        ("v6 = v5 s0", v[5] == v[4] * s[0]),
        ("v6 = v4 s1 s0", v[5] == v[3] * s[1] * s[0]),
        ("v6 = v3 s0 s1 s0", v[5] == v[2] * s[0] * s[1] * s[0]),
        ("v6 = v2 (s1 s0)^2", v[5] == v[1] * (s[1] * s[0]) ** 2),
        ("v1 has order 6", v[0].order() == 6),
        ("v1^3 is not trivial", not (v[0] ** 3).is_identity()),
    ]
    for label, ok in checks:
        if not ok:
            raise VerificationError(f"v-word identity failed: {label}")
    return VWordTable(tuple(V_WORDS_S))


# ---------------------------------------------------------------------------
# the catalog of maximal semisparse subgroups
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Table1Row:
    row: int
    label: str
    order: int
    generator_text: str
    census_row: int  # row number under which Tables 2-4 list this subgroup

    def spec(self) -> SubgroupSpec:
        words = tuple(
            Word.parse(part.strip(), V_ALPHABET).substitute(V_WORDS_S)
            for part in self.generator_text.split(",")
        )
        return SubgroupSpec(
            name=f"table1:{self.row}",
            s_words=words,
            expected_order=self.order,
            label=self.label,
            source=self.generator_text,
        )


# the subgroup listed under 58 in the maximal table has order 70 = 5 x D_14,
# which the census tables carry as row 63 (row 58 there is 2^2 x 19)
_CENSUS_ROW_FIXUP = {58: 63}


def table1_catalog() -> tuple[Table1Row, ...]:
    """The 30 maximal semisparse subgroups, transcribed generator words and
    label-implied orders. Transcription errors surface as per-row order
    mismatches when the specs are realized."""
    rows = []
    reader = csv.DictReader(StringIO(data_text("table1_generators.csv")))
    seen = set()
    for lineno, rec in enumerate(reader, start=2):
        try:
            row = int(rec["row"])
            order = int(rec["order"])
        except (KeyError, ValueError) as exc:
            raise SchemaError(f"bad catalog row: {exc}", lineno) from exc
        if row in seen:
            raise SchemaError(f"duplicate catalog row {row}", lineno)
        seen.add(row)
        rows.append(
            Table1Row(
                row=row,
                label=rec["label"],
                order=order,
                generator_text=rec["generators"],
                census_row=_CENSUS_ROW_FIXUP.get(row, row),
            )
        )
    if len(rows) != 30:
        raise SchemaError(f"expected 30 catalog rows, found {len(rows)}")
    return tuple(rows)


# ---------------------------------------------------------------------------
# structure fingerprints
# ---------------------------------------------------------------------------


@dataclass
class StructureFingerprint:
    order: int
    exponent: int | None
    center_order: int
    abelian_invariants: tuple[int, ...]
    perfect: bool
    solvable: bool

    @property
    def abelian(self) -> bool:
        out = 1
        for d in self.abelian_invariants:
            out *= d
        return out == self.order


def derived_subgroup(chain: StabilizerChain) -> StabilizerChain:
    """Normal closure of the generator commutators."""
    from .stabchain import normal_closure

    gens = list(chain.generators)
    comms = []
    for i in range(len(gens)):
        for j in range(i + 1, len(gens)):
            c = gens[i].inverse() * gens[j].inverse() * gens[i] * gens[j]
            if not c.is_identity():
                comms.append(c)
    if not comms:
        return build_chain([], chain.degree)
    _, _, closed = normal_closure(None, comms, gens)
    return closed


def structure_fingerprint(
    sub: RealizedSubgroup,
    *,
    element_cap: int = 200_000,
    with_exponent: bool = True,
    box_cap: int = 2_000_000,
) -> StructureFingerprint:
    """(order, exponent, center order, abelianization invariants,
    perfect/solvable flags) as a weak isomorphism-type check.

    The abelianization is exact: the relation lattice of the generator
    images in G/[G,G] is enumerated over the finite exponent box and its
    Smith normal form read off.
    """
    import numpy as np

    chain = sub.chain
    order = chain.order
    # derived series
    derived = derived_subgroup(chain)
    perfect = derived.order == order
    solvable = False
    d = derived
    while True:
        if d.order == 1:
            solvable = True
            break
        nxt = derived_subgroup(d)
        if nxt.order == d.order:
            break
        d = nxt

    # abelian invariants of G / [G,G]
    m = order // derived.order
    gens = [g for g in chain.generators if not g.is_identity()]
    if not gens or m == 1:
        invariants: tuple[int, ...] = ()
        if m != 1:
            raise VerificationError("abelianization without generators")
    else:
        invariants = _abelian_invariants(gens, derived, m, box_cap)

    # center and exponent by (chunked) element enumeration
    if order > element_cap:
        raise EnumerationCapExceeded(
            f"order {order} exceeds the fingerprint element cap", order, element_cap
        )
    center = 0
    exponent = 1 if with_exponent else None
    gen_arrays = [g.images for g in chain.generators]
    import math

    chunk: list[Permutation] = []

    def flush(chunk):
        nonlocal center
        if not chunk:
            return
        mat = np.vstack([p.images for p in chunk])
        ok = np.ones(len(chunk), dtype=bool)
        for g in gen_arrays:
            left = g[mat]          # rows: z * g
            right = mat[:, g]      # rows: g * z
            ok &= (left == right).all(axis=1)
        center += int(ok.sum())

    for e in chain.elements(cap=element_cap):
        if with_exponent:
            exponent = math.lcm(exponent, e.order())
        chunk.append(e)
        if len(chunk) >= 8192:
            flush(chunk)
            chunk = []
    flush(chunk)

    return StructureFingerprint(
        order=order,
        exponent=exponent,
        center_order=center,
        abelian_invariants=invariants,
        perfect=perfect,
        solvable=solvable,
    )


def _abelian_invariants(gens, derived, m, box_cap) -> tuple[int, ...]:
    """Invariant factors of the abelianization.

    The relation lattice of the generator images is {a in Z^k :
    prod gens[i]^a[i] in [G,G]}; it is generated by the vectors found in the
    finite exponent box together with the diagonal order vectors. The box is
    walked with one group product per step, and the walk stops early once
    the lattice determinant reaches |G/[G,G]|."""
    k = len(gens)
    orders = [g.order() for g in gens]
    box = 1
    for n in orders:
        box *= n
    if box > box_cap:
        raise EnumerationCapExceeded(
            f"abelianization box of size {box} exceeds the cap", box, box_cap
        )
    basis = [[orders[i] if j == i else 0 for j in range(k)] for i in range(k)]

    def det() -> int:
        out = 1
        for i in range(k):
            out *= basis[i][i]
        return out

    digits = [0] * k
    done = det() == m

    def walk(level, prefix):
        nonlocal done
        if done:
            return
        if level == k:
            if digits != [0] * k and derived.contains(prefix):
                _hnf_add(basis, digits[:])
                if det() == m:
                    done = True
            return
        g = gens[level]
        cur = prefix
        for d in range(orders[level]):
            digits[level] = d
            walk(level + 1, cur)
            if done:
                return
            cur = cur * g
        digits[level] = 0

    walk(0, gens[0] ** 0)
    if det() != m:
        raise VerificationError(
            f"relation lattice determinant {det()} never reached |G/[G,G]| = {m}"
        )
    return _smith_invariants(basis, m)


def _ext_gcd(a: int, b: int) -> tuple[int, int, int]:
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    return old_r, old_s, old_t


def _hnf_add(basis: list[list[int]], row: list[int]) -> None:
    """Fold `row` into a row-triangular lattice basis in place.

    Invariant: basis[col] has zeros left of `col`; the incoming row gets its
    columns cleared left to right, so triangularity is preserved and the
    span of (basis rows, row) is unchanged (all updates are unimodular)."""
    k = len(row)
    for col in range(k):
        if row[col] == 0:
            continue
        pivot = basis[col]
        a, b = pivot[col], row[col]
        g, x, y = _ext_gcd(a, b)
        new_pivot = [x * p + y * r for p, r in zip(pivot, row)]
        new_row = [(a // g) * r - (b // g) * p for p, r in zip(pivot, row)]
        if new_pivot[col] < 0:
            new_pivot = [-v for v in new_pivot]
        basis[col] = new_pivot
        row = new_row


def _smith_invariants(basis: list[list[int]], expected_order: int) -> tuple[int, ...]:
    """Invariant factors of Z^k / <rows> for a full-rank square basis."""
    a = [row[:] for row in basis]
    k = len(a)
    invariants = []
    for t in range(k):
        while True:
            pi, pj, best = -1, -1, None
            for i in range(t, k):
                for j in range(t, k):
                    v = abs(a[i][j])
                    if v and (best is None or v < best):
                        best, pi, pj = v, i, j
            if best is None:
                raise VerificationError("relation lattice is not full rank")
            a[t], a[pi] = a[pi], a[t]
            for row in a:
                row[t], row[pj] = row[pj], row[t]
            if a[t][t] < 0:
                a[t] = [-v for v in a[t]]
            pivot = a[t][t]
            clean = True
            for i in range(t + 1, k):
                if a[i][t]:
                    q = a[i][t] // pivot
                    a[i] = [x - q * y for x, y in zip(a[i], a[t])]
                    if a[i][t]:
                        clean = False
            for j in range(t + 1, k):
                if a[t][j]:
                    q = a[t][j] // pivot
                    for row in a:
                        row[j] -= q * row[t]
                    if a[t][j]:
                        clean = False
            if not clean:
                continue
            # enforce the divisibility chain: pivot must divide the rest
            bad = False
            for i in range(t + 1, k):
                for j in range(t + 1, k):
                    if a[i][j] % pivot:
                        a[t] = [x + y for x, y in zip(a[t], a[i])]
                        bad = True
                        break
                if bad:
                    break
            if not bad:
                break
        invariants.append(a[t][t])
    total = 1
    for d in invariants:
        total *= d
    if total != expected_order:
        raise VerificationError(
            f"Smith form order {total} disagrees with |G/[G,G]| = {expected_order}"
        )
    return tuple(d for d in invariants if d > 1)
