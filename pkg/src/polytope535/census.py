"""Face-coset spaces of the polytope and orbit censuses of its quotients.

The rank-i faces correspond to cosets of the maximal parabolic H_i. Because
every H_i projects injectively into the first factor (verified at build
time), a coset has a unique canonical representative (r_t, b): t indexes a
coset of the parabolic's image in the first-factor quotient and b an element
of the second factor. A point is encoded as t * |F| + b_index.

Every group element then acts as (t, b) -> (T[t], C[t] * b * g) with a
t-indexed correction table C and a constant right factor g; actions compose
in O(|t-space|), and a word's action is folded letter by letter. The sweep
over a 5-30 million point space is vectorized through numpy gathers.

A generic construction that keys cosets by their canonical minimal
representative (a <=120-element minimization per coset) backs the
parametrized one: it requires no product structure and serves as the
fallback and as an independent cross-check at small scale.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Protocol, Sequence

import numpy as np

from .build import FactorGroup, Universe
from .errors import (
    EnumerationCapExceeded,
    NonSemisparseInputError,
    VerificationError,
)
from .perms import Permutation, Word
from .stabchain import StabilizerChain, build_chain
from .subgroups import RealizedSubgroup

__all__ = [
    "ProductFaceSpace",
    "TableFaceSpace",
    "OrbitCensus",
    "QuotientReport",
    "face_space",
    "build_face_space",
    "build_face_space_generic",
    "orbit_census",
    "quotient_report",
]

FACET_POINTS = 5_003_460


class SpaceAction(Protocol):
    def apply(self, points: np.ndarray) -> np.ndarray: ...
    def compose(self, other: "SpaceAction") -> "SpaceAction": ...
    def key(self) -> bytes: ...


# ---------------------------------------------------------------------------
# parametrized (t, b) spaces
# ---------------------------------------------------------------------------


@dataclass
class ProductAction:
    space: "ProductFaceSpace"
    t_map: np.ndarray  # (t_count,) int32
    c_map: np.ndarray  # (t_count,) int16 left correction per source t
    b_right: int       # constant right factor index

    def _move(self, t: np.ndarray, b: np.ndarray) -> np.ndarray:
        sp = self.space
        nb = sp.factor.mult[self.c_map[t], b]
        rcol = np.ascontiguousarray(sp.factor.mult[:, self.b_right])
        nb = rcol[nb]
        return self.t_map[t].astype(np.int64) * sp.b_count + nb

    def apply(self, points: np.ndarray) -> np.ndarray:
        t, b = np.divmod(points, self.space.b_count)
        return self._move(t, b)

    def apply_to_all(self) -> np.ndarray:
        """The full image array over the whole space, using the cached
        point decomposition."""
        t, b = self.space.tb_all()
        return self._move(t, b)

    def compose(self, other: "ProductAction") -> "ProductAction":
        # self then other: t' = T2[T1[t]], c' = C2[T1[t]] * C1[t], g' = g1 * g2
        mult = self.space.factor.mult
        t1 = self.t_map
        c = mult[other.c_map[t1].astype(np.int64), self.c_map]
        # fold self's right factor through other's left corrections:
        # (t,b) -> (T1 t, C1 b g1) -> (T2 T1 t, C2 C1 b g1 g2)
        return ProductAction(
            self.space,
            other.t_map[t1],
            c.astype(np.int16),
            int(mult[self.b_right, other.b_right]),
        )

    def key(self) -> bytes:
        return self.t_map.tobytes() + self.c_map.tobytes() + self.b_right.to_bytes(4, "little")


@dataclass
class ProductFaceSpace:
    rank: int
    factor: FactorGroup
    t_action: np.ndarray    # (4, t_count) int32 coset action of each generator
    correction: np.ndarray  # (4, t_count) int16: index of phi(a)^{-1}
    gen_b: np.ndarray       # (4,) int16 second-factor index of each generator

    @property
    def t_count(self) -> int:
        return self.t_action.shape[1]

    @property
    def b_count(self) -> int:
        return self.factor.order

    @property
    def point_count(self) -> int:
        return self.t_count * self.b_count

    _tb_cache: tuple[np.ndarray, np.ndarray] | None = field(
        default=None, repr=False, compare=False
    )

    def tb_all(self) -> tuple[np.ndarray, np.ndarray]:
        if self._tb_cache is None:
            t = np.repeat(
                np.arange(self.t_count, dtype=np.int32), self.b_count
            )
            b = np.tile(np.arange(self.b_count, dtype=np.int16), self.t_count)
            self._tb_cache = (t, b)
        return self._tb_cache

    def identity_action(self) -> ProductAction:
        t = np.arange(self.t_count, dtype=np.int32)
        c = np.zeros(self.t_count, dtype=np.int16)
        return ProductAction(self, t, c, 0)

    def letter_action(self, j: int) -> ProductAction:
        return ProductAction(
            self, self.t_action[j], self.correction[j], int(self.gen_b[j])
        )

    def word_action(self, word: Word) -> ProductAction:
        act = self.identity_action()
        for idx, _exp in word.free_reduce().letters:
            act = act.compose(self.letter_action(idx))
        return act


def build_face_space(universe: Universe, rank: int) -> ProductFaceSpace:
    """The parametrized space of rank-`rank` faces (sizes 5 003 460,
    10 006 920, 30 020 760, 30 020 760 for ranks 3, 0, 1, 2).

    Falls back to the generic canonical-representative construction if the
    parabolic fails to project injectively into the first factor (it never
    does here; the check guards a wrongly built group).
    """
    h_chain = universe.parabolic_chain(rank)
    pi1_gens = [universe.j1_assignment.perms[i] for i in range(4) if i != rank]
    pi1_chain = build_chain(pi1_gens)
    if pi1_chain.order != h_chain.order:
        return build_face_space_generic(
            universe.w_marked, rank, max_points=FACET_POINTS * 6 + 1
        )

    table = universe.j1_coset_table(rank)
    from .coset_enum import coset_action

    t_assignment = coset_action(table)
    m = table.index
    t_action = np.vstack([p.images for p in t_assignment.perms])

    # transversal representatives in the first factor, in table numbering
    rep_words = table.coset_representative_words()
    j1 = [p.images for p in universe.j1_assignment.perms]
    degree = j1[0].shape[0]
    reps = np.empty((m, degree), dtype=np.int32)
    reps[0] = np.arange(degree, dtype=np.int32)
    order_of_build = sorted(range(m), key=lambda i: len(rep_words[i].letters))
    for i in order_of_build:
        w = rep_words[i].letters
        if not w:
            continue
        arr = np.arange(degree, dtype=np.int32)
        for idx, _ in w:
            arr = j1[idx][arr]
        reps[i] = arr
    rep_invs = np.empty_like(reps)
    for i in range(m):
        rep_invs[i][reps[i]] = np.arange(degree, dtype=np.int32)

    # phi: image of the parabolic in factor 1 -> factor 2, read off the
    # graph of the parabolic inside the product
    factor = universe.factor2
    phi: dict[bytes, int] = {}
    for h in h_chain.elements(cap=4096):
        a, b = universe.split(h)
        phi[a.images.tobytes()] = factor.idx_of(b)

    inv = factor.inv
    correction = np.empty((4, m), dtype=np.int16)
    for j in range(4):
        sj = j1[j]
        tj = t_action[j]
        for t in range(m):
            t2 = int(tj[t])
            a = rep_invs[t2][sj[reps[t]]]  # r_t * s_j * r_{t'}^{-1}
            idx = phi.get(a.tobytes())
            if idx is None:
                raise VerificationError("correction element escaped the parabolic")
            correction[j, t] = inv[idx]

    space = ProductFaceSpace(
        rank=rank,
        factor=factor,
        t_action=t_action,
        correction=correction,
        gen_b=factor.gen_idx.copy(),
    )
    _verify_product_space(space, universe, h_chain, rank)
    return space


def _verify_product_space(space, universe, h_chain, rank) -> None:
    expected = universe.w_chain.order // h_chain.order
    if space.point_count != expected:
        raise VerificationError(
            f"face space has {space.point_count} points, expected {expected}"
        )
    for j in range(4):
        counts = np.bincount(space.t_action[j], minlength=space.t_count)
        if not (counts == 1).all():
            raise VerificationError("generator action is not a bijection on cosets")
    # the parabolic's own generators fix the base point (t=0, b=identity)
    base = np.array([0], dtype=np.int64)
    for j in range(4):
        if j == rank:
            continue
        img = space.letter_action(j).apply(base)
        if img[0] != 0:
            raise VerificationError("parabolic generator moves the base coset")


def canonical_state(space: ProductFaceSpace, word: Word) -> int:
    """The point of the coset H * (evaluation of `word`); the base point is
    the coset of the identity."""
    act = space.word_action(word)
    return int(act.apply(np.array([0], dtype=np.int64))[0])


# ---------------------------------------------------------------------------
# generic (explicit-table) spaces
# ---------------------------------------------------------------------------


@dataclass
class TableAction:
    table: np.ndarray  # (point_count,) int32

    def apply(self, points: np.ndarray) -> np.ndarray:
        return self.table[points]

    def compose(self, other: "TableAction") -> "TableAction":
        return TableAction(other.table[self.table])

    def key(self) -> bytes:
        return self.table.tobytes()


@dataclass
class TableFaceSpace:
    rank: int
    gen_tables: np.ndarray  # (n_gens, point_count) int32

    @property
    def point_count(self) -> int:
        return self.gen_tables.shape[1]

    def identity_action(self) -> TableAction:
        return TableAction(np.arange(self.point_count, dtype=np.int32))

    def letter_action(self, j: int) -> TableAction:
        return TableAction(self.gen_tables[j])

    def word_action(self, word: Word) -> TableAction:
        act = self.identity_action()
        for idx, _exp in word.free_reduce().letters:
            act = act.compose(self.letter_action(idx))
        return act


def build_face_space_generic(marked, rank: int, *, max_points: int, h_cap: int = 512) -> TableFaceSpace:
    """Coset space built without product structure.

    Cosets are keyed by the ambient base images of their minimal
    representative, the minimum over the parabolic of h * g; representatives
    are rebuilt from keys through the ambient chain, so nothing bigger than
    one permutation is held per expansion.
    """
    ambient: StabilizerChain = marked.chain
    h = marked.maximal_parabolic(rank)
    if h.order > h_cap:
        raise EnumerationCapExceeded(
            f"parabolic of order {h.order} exceeds the canonicalization cap",
            h.order,
            h_cap,
        )
    base = np.fromiter(ambient.base, dtype=np.int64)
    h_base = np.vstack([e.images[base] for e in h.elements(cap=h_cap)]).astype(np.int64)

    def canon_key(g_images: np.ndarray) -> bytes:
        rows = g_images[h_base]  # (|H|, len(base)): base images of h*g
        idx = np.lexsort(rows.T[::-1])
        return rows[idx[0]].astype(np.int32).tobytes()

    gens = [g.images for g in marked.marks]
    ident = np.arange(marked.degree, dtype=np.int32)
    start = canon_key(ident)
    index: dict[bytes, int] = {start: 0}
    keys = [start]
    tables = [[] for _ in gens]
    qi = 0
    while qi < len(keys):
        g = ambient.element_from_key(keys[qi]).images
        qi += 1
        for j, s in enumerate(gens):
            key = canon_key(s[g])
            got = index.get(key)
            if got is None:
                got = len(keys)
                if got >= max_points:
                    raise EnumerationCapExceeded(
                        "coset space exceeds the point budget", got + 1, max_points
                    )
                index[key] = got
                keys.append(key)
            tables[j].append(got)
    n = len(keys)
    expected = ambient.order // h.order
    if n != expected:
        raise VerificationError(f"generic space found {n} cosets, expected {expected}")
    return TableFaceSpace(rank, np.array(tables, dtype=np.int32))


# ---------------------------------------------------------------------------
# orbit censuses
# ---------------------------------------------------------------------------


@dataclass
class OrbitCensus:
    subgroup_order: int
    point_count: int
    size_histogram: dict[int, int]  # orbit size -> number of orbits

    @property
    def full_orbits(self) -> int:
        return self.size_histogram.get(self.subgroup_order, 0)

    @property
    def half_orbits(self) -> int:
        if self.subgroup_order % 2:
            return 0
        return self.size_histogram.get(self.subgroup_order // 2, 0)

    @property
    def orbit_count(self) -> int:
        return sum(self.size_histogram.values())

    def check_semisparse_shape(self) -> None:
        allowed = {self.subgroup_order}
        if self.subgroup_order % 2 == 0:
            allowed.add(self.subgroup_order // 2)
        for size in self.size_histogram:
            if size not in allowed:
                raise NonSemisparseInputError(
                    f"orbit of size {size} is incompatible with a semisparse "
                    f"subgroup of order {self.subgroup_order}",
                    size,
                    self.subgroup_order,
                )
        total = sum(s * c for s, c in self.size_histogram.items())
        if total != self.point_count:
            raise VerificationError("orbit sizes do not account for every point")


def _subgroup_actions(space, sub: RealizedSubgroup, cap: int) -> list:
    """Space actions of every subgroup element via a word-tracking closure."""
    if sub.order > cap:
        raise EnumerationCapExceeded("subgroup too large for the scan census", sub.order, cap)
    gen_actions = [space.word_action(w) for w in sub.words]
    ident = space.identity_action()
    items: dict[Permutation, object] = {}
    identity_perm = sub.perms[0] ** 0 if sub.perms else None
    if identity_perm is None:
        return [ident]
    items[identity_perm] = ident
    queue = [identity_perm]
    while queue:
        p = queue.pop()
        act = items[p]
        for gp, ga in zip(sub.perms, gen_actions):
            q = p * gp
            if q not in items:
                items[q] = act.compose(ga)
                queue.append(q)
    if len(items) != sub.order:
        raise VerificationError("subgroup closure disagrees with its chain order")
    return list(items.values())


def orbit_census(
    space,
    sub: RealizedSubgroup,
    *,
    method: str = "auto",
    scan_max: int = 256,
    require_semisparse_shape: bool = True,
) -> OrbitCensus:
    """Full orbit sweep of the subgroup on the face space.

    `scan` applies every subgroup element to the whole space at once and
    reads orbits off elementwise minima (best for small subgroups); `bfs`
    walks orbits from seed points with vectorized frontiers (best for a few
    large orbits). `auto` picks by subgroup order. Both produce identical
    histograms; a sweep that meets an orbit size other than |N| or |N|/2
    aborts with NON-SEMISPARSE-INPUT unless told otherwise.
    """
    if method == "auto":
        # whole-space scans win for small subgroups (few applications over
        # millions of points); frontier BFS wins once orbits get large
        method = "scan" if sub.order <= min(32, scan_max) else "bfs"
    allowed = None
    if require_semisparse_shape:
        allowed = {sub.order}
        if sub.order % 2 == 0:
            allowed.add(sub.order // 2)
    if method == "scan":
        hist = _census_scan(space, sub, cap=max(scan_max, sub.order))
    elif method == "bfs":
        hist = _census_bfs(space, sub, allowed=allowed)
    else:
        raise ValueError(f"unknown census method {method!r}")
    census = OrbitCensus(sub.order, space.point_count, hist)
    if require_semisparse_shape:
        census.check_semisparse_shape()
    return census


def _census_scan(space, sub, cap: int) -> dict[int, int]:
    actions = _subgroup_actions(space, sub, cap)
    reps = np.arange(space.point_count, dtype=np.int64)
    points = None
    for act in actions:
        if hasattr(act, "apply_to_all"):
            img = act.apply_to_all()
        else:
            if points is None:
                points = np.arange(space.point_count, dtype=np.int64)
            img = act.apply(points)
        np.minimum(reps, img, out=reps)
    _, counts = np.unique(reps, return_counts=True)
    sizes, times = np.unique(counts, return_counts=True)
    return {int(s): int(t) for s, t in zip(sizes, times)}


def _census_bfs(space, sub, allowed: set[int] | None = None) -> dict[int, int]:
    """Orbit-by-orbit frontier sweep; aborts on the first orbit whose size
    falls outside `allowed` (when given)."""
    gen_actions = [space.word_action(w) for w in sub.words]
    n = space.point_count
    visited = np.zeros(n, dtype=bool)
    hist: dict[int, int] = {}
    cursor = 0
    chunk = 1 << 16
    while cursor < n:
        block = visited[cursor : cursor + chunk]
        free = np.nonzero(~block)[0]
        if free.size == 0:
            cursor += chunk
            continue
        seed = cursor + int(free[0])
        visited[seed] = True
        frontier = np.array([seed], dtype=np.int64)
        size = 1
        while frontier.size:
            imgs = np.concatenate([act.apply(frontier) for act in gen_actions])
            imgs = np.unique(imgs[~visited[imgs]])
            if imgs.size:
                visited[imgs] = True
            frontier = imgs
            size += int(imgs.size)
        if allowed is not None and size not in allowed:
            raise NonSemisparseInputError(
                f"orbit of size {size} is incompatible with a semisparse "
                f"subgroup of order {sub.order}",
                size,
                sub.order,
            )
        hist[size] = hist.get(size, 0) + 1
    return hist


# ---------------------------------------------------------------------------
# quotient reports
# ---------------------------------------------------------------------------


@dataclass
class QuotientReport:
    name: str
    order: int
    facet_d: int
    facet_h: int
    vertex_count: int | None
    edge_count: int | None
    face2_count: int | None
    uniform_facets: bool
    aut_order: int | None
    aut_skipped: str | None = None


def orbit_label_array(space, sub: RealizedSubgroup, *, scan_max: int = 256) -> np.ndarray:
    """Per-point orbit identifiers for the subgroup's action.

    Via the scan path each point gets the least point of its orbit; via BFS
    each orbit gets its discovery index. Either way equal labels = same
    orbit, which is all the section probe needs.
    """
    if sub.order <= scan_max:
        actions = _subgroup_actions(space, sub, cap=max(scan_max, sub.order))
        reps = np.arange(space.point_count, dtype=np.int64)
        for act in actions:
            img = act.apply_to_all() if hasattr(act, "apply_to_all") else None
            if img is None:
                img = act.apply(np.arange(space.point_count, dtype=np.int64))
            np.minimum(reps, img, out=reps)
        return reps
    gen_actions = [space.word_action(w) for w in sub.words]
    n = space.point_count
    labels = np.full(n, -1, dtype=np.int64)
    cursor = 0
    chunk = 1 << 16
    orbit_id = 0
    while cursor < n:
        block = labels[cursor : cursor + chunk]
        free = np.nonzero(block < 0)[0]
        if free.size == 0:
            cursor += chunk
            continue
        seed = cursor + int(free[0])
        labels[seed] = orbit_id
        frontier = np.array([seed], dtype=np.int64)
        while frontier.size:
            imgs = np.concatenate([act.apply(frontier) for act in gen_actions])
            imgs = np.unique(imgs[labels[imgs] < 0])
            if imgs.size:
                labels[imgs] = orbit_id
            frontier = imgs
        orbit_id += 1
    return labels


class SectionProbe:
    """Local integrity check of quotient sections, used to corroborate
    semisparse verdicts semantically.

    Around a flag g: the 6 edges, 15 2-faces and 10 facets through its vertex
    must stay in that many distinct orbits (the vertex figure has no proper
    quotients, so any collapse is fatal), and the 20 vertices, 30 edges and
    12 2-faces of its facet must either all stay distinct or all halve (the
    facet central involution acting)."""

    VERTEX_EXPECT = ((1, 6), (2, 15), (3, 10))
    FACET_EXPECT = ((0, 20), (1, 30), (2, 12))

    def __init__(self, universe: Universe):
        self.universe = universe
        self._ranks = {}
        for rank in range(4):
            table = universe.j1_coset_table(rank)
            rep_words = table.coset_representative_words()
            j1 = [p.images for p in universe.j1_assignment.perms]
            m = table.index
            degree = j1[0].shape[0]
            reps = np.empty((m, degree), dtype=np.int32)
            for i, w in enumerate(rep_words):
                arr = np.arange(degree, dtype=np.int32)
                for idx, _ in w.letters:
                    arr = j1[idx][arr]
                reps[i] = arr
            pi1 = build_chain([universe.j1_assignment.perms[i] for i in range(4) if i != rank])
            h_elems = list(pi1.elements(cap=200))
            base = np.fromiter(universe.j1_chain.base, dtype=np.int64)
            h_base = np.vstack([e.images[base] for e in h_elems]).astype(np.int64)
            key_to_t = {}
            for i in range(m):
                key_to_t[self._canon(reps[i], h_base)] = i
            rep_invs = np.empty_like(reps)
            for i in range(m):
                rep_invs[i][reps[i]] = np.arange(degree, dtype=np.int32)
            phi = {}
            factor = universe.factor2
            for h in universe.parabolic_chain(rank).elements(cap=4096):
                a, b = universe.split(h)
                phi[a.images.tobytes()] = factor.idx_of(b)
            self._ranks[rank] = (h_base, key_to_t, rep_invs, phi)
        self._transversals = self._build_transversals()

    @staticmethod
    def _canon(g1_images: np.ndarray, h_base: np.ndarray) -> bytes:
        rows = g1_images[h_base]
        idx = np.lexsort(rows.T[::-1])
        return rows[idx[0]].astype(np.int32).tobytes()

    def _build_transversals(self):
        u = self.universe
        g = u.w_gens

        def meet(i, j):
            keep = [k for k in range(4) if k != i and k != j]
            return build_chain([g[k] for k in keep], g[0].degree)

        def transversal(inner, outer, expected):
            inner_elems = list(inner.elements(cap=64))
            out, seen = [], set()
            for h in outer.elements(cap=256):
                key = frozenset((e * h)._bytes for e in inner_elems)
                if key not in seen:
                    seen.add(key)
                    out.append(h)
            if len(out) != expected:
                raise VerificationError("transversal size mismatch in section probe")
            return out

        h = {i: u.parabolic_chain(i) for i in range(4)}
        return {
            ("v", 1): transversal(meet(0, 1), h[0], 6),
            ("v", 2): transversal(meet(0, 2), h[0], 15),
            ("v", 3): transversal(meet(0, 3), h[0], 10),
            ("f", 0): transversal(meet(0, 3), h[3], 20),
            ("f", 1): transversal(meet(1, 3), h[3], 30),
            ("f", 2): transversal(meet(2, 3), h[3], 12),
        }

    def state_of(self, rank: int, g: Permutation) -> int:
        """Face-space point of the coset H_rank * g, for an arbitrary element."""
        h_base, key_to_t, rep_invs, phi = self._ranks[rank]
        g1, g2 = self.universe.split(g)
        t = key_to_t[self._canon(g1.images, h_base)]
        a = rep_invs[t][g1.images]  # g1 * r_t^{-1}
        idx = phi.get(a.tobytes())
        if idx is None:
            raise VerificationError("correction escaped the parabolic in state_of")
        factor = self.universe.factor2
        b = factor.mult[factor.inv[idx], factor.idx_of(g2)]
        return t * factor.order + int(b)

    def flag_collapses(self, labels: dict[int, np.ndarray], g: Permutation) -> list[tuple[str, int, int]]:
        out = []
        for rank, expect in self.VERTEX_EXPECT:
            pts = {int(labels[rank][self.state_of(rank, h * g)])
                   for h in self._transversals[("v", rank)]}
            if len(pts) != expect:
                out.append((f"rank{rank}-at-vertex", len(pts), expect))
        facet_counts = []
        for rank, expect in self.FACET_EXPECT:
            pts = {int(labels[rank][self.state_of(rank, h * g)])
                   for h in self._transversals[("f", rank)]}
            facet_counts.append((rank, len(pts), expect))
        if not (all(c == e for _, c, e in facet_counts)
                or all(2 * c == e for _, c, e in facet_counts)):
            for rank, c, e in facet_counts:
                if c != e and 2 * c != e:
                    out.append((f"rank{rank}-of-facet", c, e))
            if not out:
                out.append(("facet-mixed-halving", 0, 0))
        return out

    def probe(self, sub: RealizedSubgroup, flags: Sequence[Permutation]) -> dict:
        labels = {rank: orbit_label_array(face_space(self.universe, rank), sub)
                  for rank in range(4)}
        bad = {}
        for g in flags:
            collapses = self.flag_collapses(labels, g)
            if collapses:
                bad[g] = collapses
        return bad


_SPACE_CACHE_ATTR = "_face_spaces"


def face_space(universe: Universe, rank: int) -> ProductFaceSpace:
    cache = getattr(universe, _SPACE_CACHE_ATTR, None)
    if cache is None:
        cache = {}
        setattr(universe, _SPACE_CACHE_ATTR, cache)
    if rank not in cache:
        cache[rank] = build_face_space(universe, rank)
    return cache[rank]


def quotient_report(
    universe: Universe,
    sub: RealizedSubgroup,
    *,
    ranks: Sequence[int] = (3, 0, 1, 2),
    with_aut: bool = True,
    max_orbit: int = 600_000,
) -> QuotientReport:
    """Facet census plus lower-rank orbit counts and the automorphism-group
    order of the quotient (normalizer order / |N|), when its conjugation
    orbit fits the budget."""
    facet = orbit_census(face_space(universe, 3), sub)
    counts: dict[int, int | None] = {0: None, 1: None, 2: None}
    for rank in ranks:
        if rank == 3:
            continue
        counts[rank] = orbit_census(face_space(universe, rank), sub).orbit_count
    aut_order: int | None = None
    skipped = None
    if with_aut:
        from .stabchain import normalizer_via_orbit
        from .errors import OrbitBudgetExceeded

        try:
            res = normalizer_via_orbit(
                sub.perms, universe.w_chain, max_orbit=max_orbit
            )
            if res.normalizer_order % sub.order:
                raise VerificationError("normalizer order not divisible by |N|")
            aut_order = res.normalizer_order // sub.order
        except OrbitBudgetExceeded as err:
            skipped = f"conjugate orbit exceeded budget ({err.partial_count}+ of {err.budget})"
    return QuotientReport(
        name=sub.name,
        order=sub.order,
        facet_d=facet.full_orbits,
        facet_h=facet.half_orbits,
        vertex_count=counts[0],
        edge_count=counts[1],
        face2_count=counts[2],
        uniform_facets=(facet.full_orbits == 0) or (facet.half_orbits == 0),
        aut_order=aut_order,
        aut_skipped=skipped,
    )
