"""Base-and-strong-generating-set machinery (deterministic Schreier-Sims).

The construction is fully deterministic: no randomized sifting, a fixed
base-selection rule (the first point moved by the earliest generator at each
level, recursively), and insertion-ordered orbits. Two builds from the same
generator sequence produce identical bases and transversals.

Transversal entries are frozen once written. Orbits only ever extend, which
keeps every previously verified Schreier generator verified and makes the
incremental construction sound; a final full Schreier pass re-checks the
whole chain before it is handed out.

Group elements are identified by their ambient base images ("keys").
A key both deduplicates elements exactly and reconstructs the full
permutation in O(base length) products, which the conjugation-orbit code
leans on heavily to avoid storing full image arrays per orbit node.
"""
from __future__ import annotations

import hashlib
import struct
from collections import deque
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .errors import (
    DegreeMismatchError,
    EnumerationCapExceeded,
    OrbitBudgetExceeded,
    VerificationError,
)
from .perms import Permutation

__all__ = [
    "StabilizerChain",
    "build_chain",
    "conjugacy_orbit",
    "ConjugacyOrbit",
    "normalizer_via_orbit",
    "NormalizerOrbit",
    "normal_closure",
]

_I32 = np.int32


def _compose(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """a then b."""
    return b[a]


def _inverse(a: np.ndarray) -> np.ndarray:
    inv = np.empty_like(a)
    inv[a] = np.arange(len(a), dtype=a.dtype)
    return inv


class _Level:
    __slots__ = ("base_point", "gens", "u", "u_inv", "pending")

    def __init__(self, base_point: int, degree: int):
        self.base_point = base_point
        self.gens: list[np.ndarray] = []  # strong generators placed at this level
        ident = np.arange(degree, dtype=_I32)
        ident.flags.writeable = False
        self.u: dict[int, np.ndarray] = {base_point: ident}  # point -> rep, rep[b]=point
        self.u_inv: dict[int, np.ndarray] = {base_point: ident}
        self.pending: deque = deque()  # (point, generator array) Schreier pairs


class StabilizerChain:
    """A verified stabilizer chain for a finite permutation group."""

    def __init__(self, degree: int, generators: Sequence[Permutation] = ()):
        if degree < 1:
            raise ValueError("degree must be positive")
        self.degree = degree
        self.generators: tuple[Permutation, ...] = tuple(generators)
        self._levels: list[_Level] = []
        self._identity = np.arange(degree, dtype=_I32)
        self._order: int | None = None

    # -- construction -------------------------------------------------------

    @classmethod
    def build(cls, generators: Sequence[Permutation], degree: int | None = None) -> "StabilizerChain":
        gens = tuple(generators)
        if degree is None:
            if not gens:
                raise ValueError("degree required for an empty generating set")
            degree = gens[0].degree
        for g in gens:
            if g.degree != degree:
                raise DegreeMismatchError("generators must share one degree")
        chain = cls(degree, gens)
        for g in gens:
            chain._insert(np.asarray(g.images, dtype=_I32), 0)
            chain._drain()
        chain._verify()
        return chain

    def _is_ident(self, arr: np.ndarray) -> bool:
        return bool((arr == self._identity).all())

    def _gens_at(self, level: int) -> list[np.ndarray]:
        """All strong generators fixing base[0..level-1]."""
        out: list[np.ndarray] = []
        for lv in self._levels[level:]:
            out.extend(lv.gens)
        return out

    def _insert(self, arr: np.ndarray, from_level: int) -> None:
        """Place a new strong generator at the first level whose base it moves."""
        if self._is_ident(arr):
            return
        self._order = None
        j = from_level
        while j < len(self._levels) and arr[self._levels[j].base_point] == self._levels[j].base_point:
            j += 1
        if j == len(self._levels):
            moved = int(np.nonzero(arr != self._identity)[0][0])
            self._levels.append(_Level(moved, self.degree))
        lvl = self._levels[j]
        arr = np.ascontiguousarray(arr)
        arr.flags.writeable = False
        lvl.gens.append(arr)
        # the generator joins S_i for every i <= j: queue its Schreier pairs
        # against the existing orbits, then grow each orbit
        for i in range(j + 1):
            li = self._levels[i]
            for p in list(li.u.keys()):
                li.pending.append((p, arr))
            self._extend_orbit(i)

    def _extend_orbit(self, level: int) -> None:
        """Grow the basic orbit at `level` under the current S_level.

        Existing transversal entries are never rewritten.
        """
        lv = self._levels[level]
        gens = self._gens_at(level)
        frontier = deque(lv.u.keys())
        while frontier:
            p = frontier.popleft()
            up = lv.u[p]
            for g in gens:
                q = int(g[p])
                if q not in lv.u:
                    uq = _compose(up, g)
                    uq.flags.writeable = False
                    lv.u[q] = uq
                    for h in gens:
                        lv.pending.append((q, h))
                    frontier.append(q)

    def _u_inverse(self, level: int, point: int) -> np.ndarray:
        lv = self._levels[level]
        got = lv.u_inv.get(point)
        if got is None:
            got = _inverse(lv.u[point])
            got.flags.writeable = False
            lv.u_inv[point] = got
        return got

    def _strip(self, arr: np.ndarray, from_level: int) -> tuple[np.ndarray, int]:
        """Sift: returns (residue, level index where the strip stopped)."""
        for i in range(from_level, len(self._levels)):
            lv = self._levels[i]
            x = int(arr[lv.base_point])
            if x not in lv.u:
                return arr, i
            arr = _compose(arr, self._u_inverse(i, x))
        return arr, len(self._levels)

    def _drain(self) -> None:
        """Process Schreier pairs, deepest level first, until none remain."""
        while True:
            lvl_idx = -1
            for i in range(len(self._levels) - 1, -1, -1):
                if self._levels[i].pending:
                    lvl_idx = i
                    break
            if lvl_idx < 0:
                return
            lv = self._levels[lvl_idx]
            p, g = lv.pending.popleft()
            q = int(g[p])
            schreier = _compose(_compose(lv.u[p], g), self._u_inverse(lvl_idx, q))
            if self._is_ident(schreier):
                continue
            residue, stop = self._strip(schreier, lvl_idx + 1)
            if not self._is_ident(residue):
                self._insert(residue, lvl_idx + 1)

    def _verify(self) -> None:
        """Full Schreier check of the final chain, plus original-generator sifts."""
        for i, lv in enumerate(self._levels):
            gens = self._gens_at(i)
            for p in lv.u:
                up = lv.u[p]
                for g in gens:
                    q = int(g[p])
                    if q not in lv.u:
                        raise VerificationError("orbit not closed under strong generators")
                    schreier = _compose(_compose(up, g), self._u_inverse(i, q))
                    residue, _ = self._strip(schreier, i + 1)
                    if not self._is_ident(residue):
                        raise VerificationError("Schreier generator fails to sift")
        for g in self.generators:
            if not self.contains(g):
                raise VerificationError("original generator fails to sift")

    # -- queries ------------------------------------------------------------

    @property
    def order(self) -> int:
        if self._order is None:
            n = 1
            for lv in self._levels:
                n *= len(lv.u)
            self._order = n
        return self._order

    @property
    def base(self) -> tuple[int, ...]:
        return tuple(lv.base_point for lv in self._levels)

    def basic_orbit_sizes(self) -> tuple[int, ...]:
        return tuple(len(lv.u) for lv in self._levels)

    def sift(self, p: Permutation) -> Permutation:
        if p.degree != self.degree:
            raise DegreeMismatchError(f"degree {p.degree} against chain degree {self.degree}")
        residue, _ = self._strip(np.asarray(p.images, dtype=_I32), 0)
        return Permutation(residue, _checked=True)

    def contains(self, p: Permutation) -> bool:
        if p.degree != self.degree:
            raise DegreeMismatchError(f"degree {p.degree} against chain degree {self.degree}")
        residue, _ = self._strip(np.asarray(p.images, dtype=_I32), 0)
        return self._is_ident(residue)

    def __contains__(self, p: Permutation) -> bool:
        return self.contains(p)

    def elements(self, cap: int | None = None) -> Iterator[Permutation]:
        """Yield each element exactly once, in transversal-product order.

        The order is the lexicographic order of (sorted orbit point at the
        deepest level, ..., sorted orbit point at level 0); deterministic for
        a fixed chain.
        """
        if cap is not None and self.order > cap:
            raise EnumerationCapExceeded(
                f"group order {self.order} exceeds enumeration cap {cap}",
                self.order,
                cap,
            )
        if not self._levels:
            yield Permutation.identity(self.degree)
            return
        orbits = [sorted(lv.u.keys()) for lv in self._levels]

        def rec(level: int, partial: np.ndarray | None) -> Iterator[np.ndarray]:
            # partial is the product of transversal reps for levels > level,
            # applied first; the current level's rep is appended on the right
            lv = self._levels[level]
            for p in orbits[level]:
                prod = lv.u[p] if partial is None else _compose(partial, lv.u[p])
                if level == 0:
                    yield prod
                else:
                    yield from rec(level - 1, prod)

        for arr in rec(len(self._levels) - 1, None):
            yield Permutation(arr, _checked=True)

    # -- element keys -------------------------------------------------------

    def base_image_key(self, p: Permutation | np.ndarray) -> bytes:
        arr = p.images if isinstance(p, Permutation) else p
        return arr[np.fromiter(self.base, dtype=np.int64, count=len(self._levels))].astype(_I32).tobytes()

    def key_array(self, arr: np.ndarray) -> np.ndarray:
        base = np.fromiter(self.base, dtype=np.int64, count=len(self._levels))
        return arr[base].astype(_I32)

    def element_from_key(self, key: bytes) -> Permutation:
        """Rebuild the unique group element with the given base images."""
        imgs = np.frombuffer(key, dtype=_I32).copy()
        if len(imgs) != len(self._levels):
            raise ValueError("key length does not match the chain base")
        result: np.ndarray | None = None
        for i, lv in enumerate(self._levels):
            x = int(imgs[i])
            if x not in lv.u:
                raise ValueError("key does not describe a group element")
            t = lv.u[x]
            t_inv = self._u_inverse(i, x)
            imgs[i + 1 :] = t_inv[imgs[i + 1 :]]
            result = t if result is None else _compose(t, result)
        if result is None:
            return Permutation.identity(self.degree)
        return Permutation(result, _checked=True)

    # -- serialization ------------------------------------------------------

    _MAGIC = b"P535SC01"

    def save(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(self._MAGIC)
            fh.write(struct.pack("<II", self.degree, len(self.generators)))
            for g in self.generators:
                fh.write(g.images.astype(_I32).tobytes())
            fh.write(struct.pack("<I", len(self._levels)))
            for lv in self._levels:
                fh.write(struct.pack("<III", lv.base_point, len(lv.gens), len(lv.u)))
                for g in lv.gens:
                    fh.write(g.tobytes())
                for p, arr in lv.u.items():
                    fh.write(struct.pack("<I", p))
                    fh.write(arr.tobytes())

    @classmethod
    def load(cls, path) -> "StabilizerChain":
        with open(path, "rb") as fh:
            if fh.read(8) != cls._MAGIC:
                raise ValueError("not a stabilizer chain cache file")
            degree, ngens = struct.unpack("<II", fh.read(8))
            nbytes = degree * 4

            def read_arr():
                arr = np.frombuffer(fh.read(nbytes), dtype=_I32).copy()
                arr.flags.writeable = False
                return arr

            gens = [Permutation(read_arr(), _checked=True) for _ in range(ngens)]
            chain = cls(degree, gens)
            (nlevels,) = struct.unpack("<I", fh.read(4))
            for _ in range(nlevels):
                bp, ng, npts = struct.unpack("<III", fh.read(12))
                lv = _Level(bp, degree)
                lv.u.clear()
                lv.u_inv.clear()
                lv.gens = [read_arr() for _ in range(ng)]
                for _ in range(npts):
                    (p,) = struct.unpack("<I", fh.read(4))
                    lv.u[p] = read_arr()
                chain._levels.append(lv)
        return chain

    @staticmethod
    def cache_key(generators: Sequence[Permutation]) -> str:
        h = hashlib.sha256()
        h.update(StabilizerChain._MAGIC)
        for g in generators:
            h.update(struct.pack("<I", g.degree))
            h.update(g.images.astype(_I32).tobytes())
        return h.hexdigest()


def build_chain(generators: Sequence[Permutation], degree: int | None = None) -> StabilizerChain:
    """Deterministic Schreier-Sims; the empty set yields the trivial group."""
    return StabilizerChain.build(generators, degree)


# ---------------------------------------------------------------------------
# Conjugation orbits of elements
# ---------------------------------------------------------------------------


@dataclass
class ConjugacyOrbit:
    orbit_size: int
    centralizer_order: int
    keys: set[bytes] | None = None
    centralizer: StabilizerChain | None = None


def conjugacy_orbit(
    g: Permutation,
    group: StabilizerChain,
    *,
    max_orbit: int | None = None,
    want_keys: bool = False,
    want_centralizer: bool = False,
) -> ConjugacyOrbit:
    """Sweep the conjugation orbit of g under `group`.

    Stores one base-image key per orbit element; elements are rebuilt from
    their keys on demand, so memory stays at a few dozen bytes per node.
    Raises :class:`OrbitBudgetExceeded` (with the partial count) if the orbit
    outgrows ``max_orbit``.
    """
    if not group.contains(g):
        raise ValueError("element is not in the group")
    gens = [np.asarray(x.images, dtype=_I32) for x in group.generators]
    gen_invs = [_inverse(x) for x in gens]
    start = np.asarray(g.images, dtype=_I32)
    start_key = group.base_image_key(start)
    seen: dict[bytes, bytes] = {start_key: group.base_image_key(np.arange(group.degree, dtype=_I32))}
    queue: deque[bytes] = deque([start_key])
    while queue:
        key = queue.popleft()
        x = group.element_from_key(key).images
        conj_key = seen[key]
        for s, s_inv, base_gen in zip(gens, gen_invs, group.generators):
            y = _compose(_compose(s_inv, x), s)
            ykey = group.base_image_key(y)
            if ykey not in seen:
                if max_orbit is not None and len(seen) >= max_orbit:
                    raise OrbitBudgetExceeded(
                        "conjugation orbit exceeded its node budget",
                        len(seen),
                        max_orbit,
                    )
                w = group.element_from_key(conj_key) * base_gen
                seen[ykey] = group.base_image_key(w)
                queue.append(ykey)
    size = len(seen)
    if group.order % size:
        raise VerificationError("orbit size does not divide the group order")
    cent_order = group.order // size
    result = ConjugacyOrbit(size, cent_order)
    if want_keys:
        result.keys = set(seen.keys())
    if want_centralizer:
        result.centralizer = _stabilizer_from_orbit(
            group, seen, start_key, gens, cent_order, mode="element"
        )
    return result


def _stabilizer_from_orbit(
    group: StabilizerChain,
    transversal: dict[bytes, bytes],
    root_key: bytes,
    gens: list[np.ndarray],
    target_order: int,
    mode: str,
    node_images=None,
) -> StabilizerChain:
    """Build the orbit stabilizer from Schreier elements, stopping at the
    known target order."""
    strong: list[Permutation] = []
    chain = build_chain(strong, group.degree)
    if chain.order == target_order:
        return chain
    base_gens = list(group.generators)
    for key, wkey in transversal.items():
        u = group.element_from_key(wkey)
        x = group.element_from_key(key).images if mode == "element" else None
        for s_arr, s in zip(gens, base_gens):
            if mode == "element":
                y = _compose(_compose(_inverse(s_arr), x), s_arr)
                ykey = group.base_image_key(y)
            else:
                ykey = node_images(key, s_arr)
            v = group.element_from_key(transversal[ykey])
            schreier = u * s * v.inverse()
            if not chain.contains(schreier):
                strong.append(schreier)
                chain = build_chain(strong, group.degree)
                if chain.order == target_order:
                    return chain
    raise VerificationError("stabilizer generators did not reach the orbit-stabilizer order")


# ---------------------------------------------------------------------------
# Conjugation orbits of subgroups (normalizers)
# ---------------------------------------------------------------------------


@dataclass
class NormalizerOrbit:
    conjugate_count: int
    normalizer_order: int
    subgroup_order: int
    normalizer: StabilizerChain | None = None
    certified: bool = True


@dataclass
class _SubgroupOrbitState:
    digests: dict[bytes, bytes] = field(default_factory=dict)  # digest -> conjugator key


def normalizer_via_orbit(
    n_generators: Sequence[Permutation],
    ambient: StabilizerChain,
    *,
    max_orbit: int = 600_000,
    element_cap: int = 200_000,
    want_normalizer: bool = False,
) -> NormalizerOrbit:
    """Count the conjugates of N = <n_generators> under the ambient group and
    derive the normalizer order from orbit-stabilizer.

    A conjugate N^w is identified by a 128-bit digest of the sorted list of
    its elements' ambient base-image tuples. The digest set is exact up to
    hash collision; the result is then certified collision-free by rebuilding
    the stabilizer as an explicit normalizer chain whose order must multiply
    with the conjugate count to the ambient order, with every Schreier
    element verified to normalize N.
    """
    n_gens = [g for g in n_generators if not g.is_identity()]
    n_chain = build_chain(n_gens, ambient.degree)
    n_order = n_chain.order
    if n_order > element_cap:
        # cheap path: normal subgroups need no sweep
        if _is_normal(n_gens, n_chain, ambient):
            return NormalizerOrbit(1, ambient.order, n_order,
                                   ambient if want_normalizer else None, True)
        raise EnumerationCapExceeded(
            f"subgroup of order {n_order} is too large to key by elements",
            n_order,
            element_cap,
        )
    if _is_normal(n_gens, n_chain, ambient):
        return NormalizerOrbit(1, ambient.order, n_order,
                               ambient if want_normalizer else None, True)

    degree = ambient.degree
    base = np.fromiter(ambient.base, dtype=np.int64, count=len(ambient.base))
    # root element matrix: every element of N, one row each
    rows = [p.images for p in n_chain.elements()]
    X = np.vstack(rows).astype(np.int16)
    ident = np.arange(degree, dtype=_I32)

    # order-independent 128-bit set digest: every element's base-image tuple
    # is packed by a Horner pass, scrambled through a splitmix finalizer, and
    # the per-element hashes combined by wrap-around sum and xor. Exactness
    # does not ride on this hash: the certificate below rebuilds the
    # stabilizer explicitly and a collision cannot survive it.
    _H = np.uint64(0x100000001B3)
    _M1 = np.uint64(0xBF58476D1CE4E5B9)
    _M2 = np.uint64(0x94D049BB133111EB)

    def digest_of(w: np.ndarray, w_inv: np.ndarray) -> bytes:
        # base images of {x^w : x in N}: (x^w)[b] = w[x[w_inv[b]]]
        cols = w_inv[base]
        keyed = w[X[:, cols]].astype(np.uint64)
        row = np.zeros(keyed.shape[0], dtype=np.uint64)
        for j in range(keyed.shape[1]):
            row = row * _H + keyed[:, j]
        z = (row ^ (row >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
        z ^= z >> np.uint64(31)
        total = np.add.reduce(z, dtype=np.uint64)
        folded = np.bitwise_xor.reduce(z)
        return int(total).to_bytes(8, "little") + int(folded).to_bytes(8, "little")

    ident_key = ambient.base_image_key(ident)
    root_digest = digest_of(ident, ident)
    gens = [np.asarray(g.images, dtype=_I32) for g in ambient.generators]
    state = _SubgroupOrbitState()
    state.digests[root_digest] = ident_key
    order: list[bytes] = [root_digest]
    queue = deque([root_digest])
    while queue:
        d = queue.popleft()
        u = ambient.element_from_key(state.digests[d]).images
        for s_arr in gens:
            w = _compose(u, s_arr)
            w_inv = _inverse(w)
            nd = digest_of(w, w_inv)
            if nd not in state.digests:
                if len(state.digests) >= max_orbit:
                    raise OrbitBudgetExceeded(
                        "subgroup conjugation orbit exceeded its node budget",
                        len(state.digests),
                        max_orbit,
                    )
                state.digests[nd] = ambient.base_image_key(w)
                order.append(nd)
                queue.append(nd)
    count = len(state.digests)
    if ambient.order % count:
        raise VerificationError("conjugate count does not divide the ambient order")
    target = ambient.order // count

    # certificate: build the normalizer from Schreier elements; every element
    # must actually normalize N and the chain must reach the target order
    strong: list[Permutation] = list(n_chain.generators)
    norm_chain = build_chain(strong, degree)
    certified = norm_chain.order == target
    if not certified:
        for d in order:
            u = ambient.element_from_key(state.digests[d])
            u_arr = u.images
            for s_arr, s in zip(gens, ambient.generators):
                w = _compose(u_arr, s_arr)
                w_inv = _inverse(w)
                nd = digest_of(w, w_inv)
                v = ambient.element_from_key(state.digests[nd])
                schreier = u * s * v.inverse()
                if not norm_chain.contains(schreier):
                    if not _normalizes(schreier, n_gens, n_chain):
                        raise VerificationError(
                            "digest collision detected: Schreier element does not normalize"
                        )
                    strong.append(schreier)
                    norm_chain = build_chain(strong, degree)
                    if norm_chain.order == target:
                        certified = True
                        break
            if certified:
                break
        if norm_chain.order != target:
            raise VerificationError(
                "normalizer order does not match the orbit-stabilizer target"
            )
    for g in norm_chain.generators:
        if not _normalizes(g, n_gens, n_chain):
            raise VerificationError("normalizer chain contains a non-normalizing generator")
    return NormalizerOrbit(
        count, target, n_order, norm_chain if want_normalizer else None, True
    )


def _normalizes(w: Permutation, n_gens: Sequence[Permutation], n_chain: StabilizerChain) -> bool:
    w_inv = w.inverse()
    return all(n_chain.contains(w_inv * g * w) for g in n_gens)


def _is_normal(n_gens: Sequence[Permutation], n_chain: StabilizerChain, ambient: StabilizerChain) -> bool:
    return all(
        n_chain.contains(s.inverse() * g * s)
        for s in ambient.generators
        for g in n_gens
    )


def normal_closure(
    seed_words,
    seed_perms: Sequence[Permutation],
    conjugating: Sequence[Permutation],
    conjugating_words=None,
) -> tuple[list, list[Permutation], StabilizerChain]:
    """Normal closure of <seed_perms> under the group generated by `conjugating`.

    Returns (words, generators, chain). Words stay aligned with generators
    when both seed_words and conjugating_words are given (used to keep
    word-level descriptions of kernels available for coset-space actions).
    """
    gens = list(seed_perms)
    words = list(seed_words) if seed_words is not None else [None] * len(gens)
    chain = build_chain(gens, conjugating[0].degree)
    changed = True
    while changed:
        changed = False
        for gi in range(len(gens)):
            for ci, c in enumerate(conjugating):
                conj = c.inverse() * gens[gi] * c
                if not chain.contains(conj):
                    gens.append(conj)
                    if conjugating_words is not None and words[gi] is not None:
                        words.append(words[gi].conjugated_by(conjugating_words[ci]))
                    else:
                        words.append(None)
                    chain = build_chain(gens, chain.degree)
                    changed = True
    return words, gens, chain
