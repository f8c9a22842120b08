"""String C-group verification: Coxeter types, parabolic subgroups, and the
intersection property.

A MarkedGroup is a permutation group together with an ordered tuple of
involutory generators. Parabolic subgroups are built on demand and cached by
index subset. The intersection property is checked pairwise over all subset
pairs by enumerating the smaller parabolic and membership-testing against
the other; every proper parabolic in scope here has order at most 120, so
the quadratic method is exact and cheap.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

from .errors import EnumerationCapExceeded, VerificationError
from .perms import Permutation
from .stabchain import StabilizerChain, build_chain

__all__ = ["MarkedGroup", "IntersectionVerdict", "facet_central_involution"]


@dataclass
class IntersectionVerdict:
    ok: bool
    witness: tuple[frozenset[int], frozenset[int], Permutation] | None = None

    def __bool__(self) -> bool:
        return self.ok


@dataclass
class MarkedGroup:
    """A group with an ordered list of involutory generators s0..s_{n-1}."""

    name: str
    marks: tuple[Permutation, ...]
    chain: StabilizerChain = None  # whole-group chain; built if omitted
    _parabolics: dict[frozenset[int], StabilizerChain] = field(default_factory=dict)

    def __post_init__(self):
        if not self.marks:
            raise ValueError("a marked group needs at least one mark")
        for i, m in enumerate(self.marks):
            if not (m * m).is_identity():
                raise ValueError(f"mark s{i} is not an involution")
        for i, j in combinations(range(self.rank), 2):
            if j - i >= 2 and self.marks[i] * self.marks[j] != self.marks[j] * self.marks[i]:
                raise VerificationError(
                    f"string condition violated: s{i} and s{j} do not commute"
                )
        if self.chain is None:
            self.chain = build_chain(self.marks)
        self._parabolics[frozenset(range(self.rank))] = self.chain

    @property
    def rank(self) -> int:
        return len(self.marks)

    @property
    def degree(self) -> int:
        return self.marks[0].degree

    def parabolic(self, indices) -> StabilizerChain:
        """The subgroup generated by the marks with the given indices."""
        key = frozenset(indices)
        got = self._parabolics.get(key)
        if got is None:
            got = build_chain([self.marks[i] for i in sorted(key)], self.degree)
            self._parabolics[key] = got
        return got

    def maximal_parabolic(self, omit: int) -> StabilizerChain:
        """H_i: the parabolic omitting mark i (its cosets model rank-i faces)."""
        return self.parabolic(i for i in range(self.rank) if i != omit)

    def coxeter_matrix(self) -> list[list[int]]:
        """The matrix of orders of the products s_i s_j; diagonal is 1."""
        n = self.rank
        for i, m in enumerate(self.marks):
            if m.order() > 2:
                raise VerificationError(f"mark s{i} has order > 2")
        mat = [[1] * n for _ in range(n)]
        for i in range(n):
            for j in range(i + 1, n):
                o = (self.marks[i] * self.marks[j]).order()
                mat[i][j] = mat[j][i] = o
        return mat

    def schlafli_symbol(self) -> list[int]:
        mat = self.coxeter_matrix()
        return [mat[i][i + 1] for i in range(self.rank - 1)]

    def intersection_property(self, enum_cap: int = 512) -> IntersectionVerdict:
        """Check H_I cap H_J == H_{I cap J} for all subset pairs I, J.

        Pairs where one side contains the other hold by inclusion and are
        skipped; for the rest the smaller parabolic is enumerated and each
        element membership-tested against the other side. Returns the first
        failing pair with a witness element, in deterministic order.
        """
        n = self.rank
        subsets = [frozenset(i for i in range(n) if mask >> i & 1) for mask in range(1 << n)]
        for I in subsets:
            for J in subsets:
                if I <= J or J <= I:
                    continue
                meet = self.parabolic(I & J)
                a, b = self.parabolic(I), self.parabolic(J)
                small, other = (a, b) if a.order <= b.order else (b, a)
                if small.order > enum_cap:
                    raise EnumerationCapExceeded(
                        f"parabolic of order {small.order} exceeds the cap",
                        small.order,
                        enum_cap,
                    )
                hits = 0
                for e in small.elements(cap=enum_cap):
                    if other.contains(e):
                        hits += 1
                        if not meet.contains(e):
                            return IntersectionVerdict(False, (I, J, e))
                if hits != meet.order:
                    # unreachable: the meet lies in both sides, so any count
                    # excess is an extra element already reported above
                    raise VerificationError("intersection count disagrees with the meet")
        return IntersectionVerdict(True)

    def parabolic_order_map(self) -> dict[str, int]:
        """Orders of the named parabolics used in reports."""
        out: dict[str, int] = {}
        for omit in range(self.rank):
            out[f"H{omit}"] = self.maximal_parabolic(omit).order
        return out


def facet_central_involution(mg: MarkedGroup) -> Permutation:
    """The central involution of the facet group of a rank-4 [5,3,5] group.

    Returns the evaluation of (s0 s1 s2)^5 after verifying it is a
    non-identity involution, lies in the facet parabolic, and commutes with
    s0, s1 and s2. Any failure signals a wrongly built group.
    """
    if mg.rank != 4:
        raise VerificationError("facet central involution needs a rank-4 group")
    if mg.schlafli_symbol() != [5, 3, 5]:
        raise VerificationError("facet central involution needs type [5,3,5]")
    s0, s1, s2 = mg.marks[0], mg.marks[1], mg.marks[2]
    w = (s0 * s1 * s2) ** 5
    if w.is_identity():
        raise VerificationError("facet involution collapsed to the identity")
    if not (w * w).is_identity():
        raise VerificationError("facet involution does not square to the identity")
    if not mg.parabolic({0, 1, 2}).contains(w):
        raise VerificationError("facet involution escapes the facet parabolic")
    for i, s in enumerate((s0, s1, s2)):
        if w * s != s * w:
            raise VerificationError(f"facet involution does not commute with s{i}")
    return w
