"""Finitely presented groups and Todd-Coxeter coset enumeration.

Two strategies are provided: HLT with lookahead (the default) and Felsch.
Tables are stored column-major as C integer arrays, one column per generator
plus one per non-involutory inverse; involutory generators share their
inverse column. Coincidences are processed through a union-find queue with
immediate column merging. Dead rows are compacted once they exceed a quarter
of the table.

A completed table is standardized by renumbering cosets in breadth-first
order by generator index from the subgroup coset, which makes the derived
permutation action independent of the enumeration strategy.
"""
from __future__ import annotations

from array import array
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    CosetLimitExceeded,
    IncompleteTableError,
    SchemaError,
    VerificationError,
)
from .perms import Alphabet, GeneratorAssignment, Permutation, Word

__all__ = ["Presentation", "CosetTable", "enumerate_cosets", "coset_action"]

UNDEF = -1


@dataclass(frozen=True)
class Presentation:
    """A finite presentation: named alphabet plus freely reduced relators."""

    name: str
    alphabet: Alphabet
    relators: tuple[Word, ...]

    def __post_init__(self):
        reduced = []
        for rel in self.relators:
            r = rel.free_reduce(respect_involutions=False)
            if not r.letters:
                raise ValueError(f"presentation {self.name!r} has a trivial relator")
            reduced.append(r)
        object.__setattr__(self, "relators", tuple(reduced))

    def all_relators(self) -> tuple[Word, ...]:
        """Relators plus the implied squares of involutory generators."""
        out = list(self.relators)
        present = {tuple(r.letters) for r in out}
        for i, inv in enumerate(self.alphabet.involutory):
            if inv:
                sq = ((i, 1), (i, 1))
                if sq not in present:
                    out.append(Word(self.alphabet, sq))
        return tuple(out)

    # -- text format: `gens ...` line, optional `involutions ...` line,
    #    then one relator per line in word syntax ---------------------------

    @classmethod
    def parse(cls, text: str, name: str = "presentation") -> "Presentation":
        symbols: tuple[str, ...] | None = None
        involutions: set[str] = set()
        relator_lines: list[tuple[int, str]] = []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if symbols is None:
                head, _, rest = line.partition(" ")
                if head != "gens":
                    raise SchemaError("presentation must start with a 'gens' line", lineno)
                symbols = tuple(rest.split())
                if not symbols:
                    raise SchemaError("empty generator list", lineno)
                continue
            if line.startswith("involutions"):
                involutions = set(line.split()[1:])
                unknown = involutions - set(symbols)
                if unknown:
                    raise SchemaError(f"unknown involutions {sorted(unknown)}", lineno)
                continue
            relator_lines.append((lineno, line))
        if symbols is None:
            raise SchemaError("missing 'gens' line")
        alphabet = Alphabet(name, symbols, tuple(s in involutions for s in symbols))
        relators = []
        for lineno, line in relator_lines:
            try:
                relators.append(Word.parse(line, alphabet))
            except Exception as exc:
                raise SchemaError(f"bad relator: {exc}", lineno) from exc
        return cls(name, alphabet, tuple(relators))

    @classmethod
    def from_file(cls, path) -> "Presentation":
        path = Path(path)
        return cls.parse(path.read_text(), name=path.stem)

    def to_text(self) -> str:
        lines = ["gens " + " ".join(self.alphabet.symbols)]
        invs = [s for s, f in zip(self.alphabet.symbols, self.alphabet.involutory) if f]
        if invs:
            lines.append("involutions " + " ".join(invs))
        lines.extend(str(r) for r in self.relators)
        return "\n".join(lines) + "\n"


class CosetTable:
    """Working state of a Todd-Coxeter enumeration.

    Row 0 is the subgroup coset. `p` is the union-find map onto coset
    representatives; a row is live iff p[row] == row.
    """

    def __init__(self, pres: Presentation, subgroup_words: tuple[Word, ...]):
        self.pres = pres
        self.subgroup_words = subgroup_words
        ngens = pres.alphabet.size
        # column layout: generator i forward column, then inverse columns for
        # the non-involutory generators
        self.fwd_col = list(range(ngens))
        self.inv_col = list(range(ngens))
        ncols = ngens
        for i, inv in enumerate(pres.alphabet.involutory):
            if not inv:
                self.inv_col[i] = ncols
                ncols += 1
        self.ncols = ncols
        self.col_inverse = [0] * ncols
        for i in range(ngens):
            self.col_inverse[self.fwd_col[i]] = self.inv_col[i]
            self.col_inverse[self.inv_col[i]] = self.fwd_col[i]
        self.cols: list[array] = [array("i", [UNDEF]) for _ in range(ncols)]
        self.p = array("i", [0])
        self.n_alive = 1
        self.dead_count = 0
        self.total_defined = 1
        self.status = "incomplete"
        self.deduction_stack: list[tuple[int, int]] = []

    # -- basics --------------------------------------------------------------

    @property
    def n_rows(self) -> int:
        return len(self.p)

    @property
    def index(self) -> int:
        return self.n_alive

    def is_alive(self, a: int) -> bool:
        return self.p[a] == a

    def column_word(self, word: Word) -> list[int]:
        return [
            self.fwd_col[i] if e == 1 else self.inv_col[i] for i, e in word.letters
        ]

    def is_complete(self) -> bool:
        cols = self.cols
        for a in range(self.n_rows):
            if self.p[a] != a:
                continue
            for c in range(self.ncols):
                if cols[c][a] == UNDEF:
                    return False
        return True

    # -- row bookkeeping -----------------------------------------------------

    def _define(self, a: int, c: int, limit: int) -> int:
        if self.n_rows >= limit:
            raise _NeedSpace()
        b = self.n_rows
        for col in self.cols:
            col.append(UNDEF)
        self.p.append(b)
        self.total_defined += 1
        self.n_alive += 1
        self.cols[c][a] = b
        self.cols[self.col_inverse[c]][b] = a
        return b

    def _rep(self, k: int) -> int:
        p = self.p
        r = k
        while p[r] != r:
            r = p[r]
        while p[k] != r:
            p[k], k = r, p[k]
        return r

    def _merge(self, a: int, b: int, queue: list[int]) -> None:
        a, b = self._rep(a), self._rep(b)
        if a != b:
            lo, hi = (a, b) if a < b else (b, a)
            self.p[hi] = lo
            queue.append(hi)
            self.n_alive -= 1
            self.dead_count += 1

    def _coincidence(self, a: int, b: int, deductions: bool) -> None:
        cols = self.cols
        queue: list[int] = []
        self._merge(a, b, queue)
        qi = 0
        while qi < len(queue):
            y = queue[qi]
            qi += 1
            for c in range(self.ncols):
                d = cols[c][y]
                if d == UNDEF:
                    continue
                inv_c = self.col_inverse[c]
                cols[inv_c][d] = UNDEF
                if deductions:
                    self.deduction_stack.append((d, inv_c))
                mu = self._rep(y)
                nu = self._rep(d)
                if cols[c][mu] != UNDEF:
                    self._merge(nu, cols[c][mu], queue)
                elif cols[inv_c][nu] != UNDEF:
                    self._merge(mu, cols[inv_c][nu], queue)
                else:
                    cols[c][mu] = nu
                    cols[inv_c][nu] = mu
                    if deductions:
                        self.deduction_stack.append((mu, c))

    # -- scanning ------------------------------------------------------------

    def _scan(self, a: int, colword: list[int], *, fill: bool, deductions: bool,
              limit: int = 0) -> None:
        """Scan `colword` from coset a; fill definitions when `fill`."""
        cols = self.cols
        f = a
        i = 0
        b = a
        j = len(colword) - 1
        while True:
            while i <= j and cols[colword[i]][f] != UNDEF:
                f = cols[colword[i]][f]
                i += 1
            if i > j:
                if f != b:
                    self._coincidence(f, b, deductions)
                return
            while j >= i and cols[self.col_inverse[colword[j]]][b] != UNDEF:
                b = cols[self.col_inverse[colword[j]]][b]
                j -= 1
            if j < i:
                self._coincidence(f, b, deductions)
                return
            if j == i:
                c = colword[i]
                cols[c][f] = b
                cols[self.col_inverse[c]][b] = f
                if deductions:
                    self.deduction_stack.append((f, c))
                return
            if not fill:
                return
            self._define(f, colword[i], limit)

    def scan_word_from(self, coset: int, word: Word) -> int:
        """Trace a word through a complete table; the result is always defined."""
        cur = coset
        for c in self.column_word(word):
            nxt = self.cols[c][cur]
            if nxt == UNDEF:
                raise IncompleteTableError("scan hit an undefined entry")
            cur = nxt
        return cur

    # -- compaction / standardization ----------------------------------------

    def compress(self) -> list[int]:
        """Drop dead rows. Returns the old-row -> new-row map (dead -> -1)."""
        remap = [UNDEF] * self.n_rows
        new = 0
        for old in range(self.n_rows):
            if self.p[old] == old:
                remap[old] = new
                new += 1
        for c in range(self.ncols):
            col = self.cols[c]
            out = array("i", bytes(4 * new))
            k = 0
            for old in range(self.n_rows):
                if remap[old] != UNDEF:
                    v = col[old]
                    out[k] = UNDEF if v == UNDEF else remap[self._rep(v)]
                    k += 1
            self.cols[c] = out
        self.p = array("i", range(new))
        self.dead_count = 0
        return remap

    def standardize(self) -> None:
        """Renumber cosets in BFS order by generator index from row 0.

        Requires a complete table; idempotent."""
        if not self.is_complete():
            raise IncompleteTableError("cannot standardize an incomplete table")
        if self.dead_count:
            self.compress()
        n = self.n_rows
        new_of_old = [UNDEF] * n
        order = [0]
        new_of_old[0] = 0
        # scan columns in generator order (forward column then, for
        # non-involutory generators, the inverse column)
        scan_cols = []
        for i in range(self.pres.alphabet.size):
            scan_cols.append(self.fwd_col[i])
            if self.inv_col[i] != self.fwd_col[i]:
                scan_cols.append(self.inv_col[i])
        qi = 0
        while qi < len(order):
            a = order[qi]
            qi += 1
            for c in scan_cols:
                b = self.cols[c][a]
                if new_of_old[b] == UNDEF:
                    new_of_old[b] = len(order)
                    order.append(b)
        if len(order) != n:
            raise VerificationError("coset table action is not transitive")
        for c in range(self.ncols):
            col = self.cols[c]
            out = array("i", bytes(4 * n))
            for old in range(n):
                out[new_of_old[old]] = new_of_old[col[old]]
            self.cols[c] = out

    def coset_representative_words(self) -> list[Word]:
        """BFS transversal words (matching the standardized numbering)."""
        if not self.is_complete() or self.dead_count:
            raise IncompleteTableError("need a complete compacted table")
        alphabet = self.pres.alphabet
        reps: list[Word | None] = [None] * self.n_rows
        reps[0] = Word.identity(alphabet)
        order = [0]
        qi = 0
        letters_for_col: dict[int, tuple[int, int]] = {}
        for i in range(alphabet.size):
            letters_for_col[self.fwd_col[i]] = (i, 1)
            if self.inv_col[i] != self.fwd_col[i]:
                letters_for_col[self.inv_col[i]] = (i, -1)
        scan_cols = list(letters_for_col.keys())
        while qi < len(order):
            a = order[qi]
            qi += 1
            for c in scan_cols:
                b = self.cols[c][a]
                if reps[b] is None:
                    reps[b] = reps[a] * Word(alphabet, (letters_for_col[c],))
                    order.append(b)
        return reps  # type: ignore[return-value]


class _NeedSpace(Exception):
    pass


def enumerate_cosets(
    pres: Presentation,
    subgroup_words: tuple[Word, ...] | list[Word] = (),
    *,
    max_cosets: int = 20_000_000,
    strategy: str = "hlt",
    standardize: bool = True,
) -> CosetTable:
    """Run Todd-Coxeter; on success the table is complete (and standardized).

    A subgroup of infinite index, or one whose enumeration needs more than
    `max_cosets` simultaneous cosets, surfaces as :class:`CosetLimitExceeded`
    carrying the incomplete table and diagnostics.
    """
    for w in subgroup_words:
        if w.alphabet != pres.alphabet:
            raise ValueError("subgroup word over the wrong alphabet")
    table = CosetTable(pres, tuple(subgroup_words))
    if strategy == "hlt":
        _run_hlt(table, max_cosets)
    elif strategy == "felsch":
        _run_felsch(table, max_cosets)
    else:
        raise ValueError(f"unknown strategy {strategy!r} (expected 'hlt' or 'felsch')")
    table.compress()
    table.status = "complete"
    if standardize:
        table.standardize()
    return table


def _limit_error(table: CosetTable, max_cosets: int) -> CosetLimitExceeded:
    return CosetLimitExceeded(
        f"coset limit {max_cosets} exceeded "
        f"({table.total_defined} cosets defined, {table.n_alive} alive)",
        table=table,
        diagnostics={
            "defined": table.total_defined,
            "alive": table.n_alive,
            "max_cosets": max_cosets,
        },
    )


def _run_hlt(table: CosetTable, max_cosets: int) -> None:
    relators = [table.column_word(w) for w in table.pres.all_relators()]
    sub_words = [table.column_word(w) for w in table.subgroup_words]
    for w in sub_words:
        try:
            table._scan(0, w, fill=True, deductions=False, limit=max_cosets)
        except _NeedSpace:
            raise _limit_error(table, max_cosets) from None
    a = 0
    while a < table.n_rows:
        if table.p[a] == a:
            try:
                for w in relators:
                    table._scan(a, w, fill=True, deductions=False, limit=max_cosets)
                    if table.p[a] != a:
                        break
                if table.p[a] == a:
                    for c in range(table.ncols):
                        if table.cols[c][a] == UNDEF:
                            table._define(a, c, max_cosets)
            except _NeedSpace:
                # lookahead: scan everything without defining, hoping for
                # coincidences, then compact and retry this coset
                before = table.n_alive
                for b in range(table.n_rows):
                    if table.p[b] != b:
                        continue
                    for w in relators:
                        table._scan(b, w, fill=False, deductions=False)
                        if table.p[b] != b:
                            break
                if table.n_alive == before:
                    raise _limit_error(table, max_cosets) from None
                rep_before = table._rep(a)
                remap = table.compress()
                a = remap[rep_before]
                continue
        if table.dead_count * 4 > table.n_rows and table.n_rows > 1024:
            rep_before = table._rep(a)
            remap = table.compress()
            a = remap[rep_before]
        a += 1
    if not table.is_complete():
        raise VerificationError("HLT loop finished with an incomplete table")


def _felsch_relator_tables(table: CosetTable) -> list[list[list[int]]]:
    """Cyclic conjugates of every relator and its inverse, grouped by first column."""
    seen: set[tuple[int, ...]] = set()
    by_first: list[list[list[int]]] = [[] for _ in range(table.ncols)]
    for rel in table.pres.all_relators():
        base = table.column_word(rel)
        inverse = [table.col_inverse[c] for c in reversed(base)]
        for word in (base, inverse):
            for k in range(len(word)):
                rot = tuple(word[k:] + word[:k])
                if rot not in seen:
                    seen.add(rot)
                    by_first[rot[0]].append(list(rot))
    return by_first


def _run_felsch(table: CosetTable, max_cosets: int) -> None:
    by_first = _felsch_relator_tables(table)
    sub_words = [table.column_word(w) for w in table.subgroup_words]
    try:
        for w in sub_words:
            table._scan(0, w, fill=True, deductions=True, limit=max_cosets)
        _process_deductions(table, by_first)
        a = 0
        while a < table.n_rows:
            if table.p[a] == a:
                for c in range(table.ncols):
                    if table.p[a] != a:
                        break
                    if table.cols[c][a] == UNDEF:
                        table._define(a, c, max_cosets)
                        table.deduction_stack.append((a, c))
                        _process_deductions(table, by_first)
            a += 1
    except _NeedSpace:
        raise _limit_error(table, max_cosets) from None
    if not table.is_complete():
        raise VerificationError("Felsch loop finished with an incomplete table")


def _process_deductions(table: CosetTable, by_first) -> None:
    stack = table.deduction_stack
    while stack:
        a, c = stack.pop()
        if table.p[a] == a:
            for w in by_first[c]:
                table._scan(a, w, fill=False, deductions=True)
                if table.p[a] != a:
                    break
        b = table.cols[c][a] if table.p[a] == a else UNDEF
        if b != UNDEF and table.p[b] == b:
            inv_c = table.col_inverse[c]
            for w in by_first[inv_c]:
                table._scan(b, w, fill=False, deductions=True)
                if table.p[b] != b:
                    break


def coset_action(table: CosetTable) -> GeneratorAssignment:
    """The permutation action on cosets of a complete standardized table.

    Every presentation relator is re-verified against the action, and every
    subgroup generator word is checked to fix the subgroup coset.
    """
    if table.status != "complete" or not table.is_complete():
        raise IncompleteTableError("coset action needs a complete table")
    n = table.n_rows
    perms = []
    for i in range(table.pres.alphabet.size):
        images = np.frombuffer(table.cols[table.fwd_col[i]], dtype=np.int32).copy()
        perms.append(Permutation(images[:n]))
    assignment = GeneratorAssignment(table.pres.alphabet, tuple(perms))
    from .perms import evaluate_word

    for rel in table.pres.all_relators():
        if not evaluate_word(rel, assignment).is_identity():
            raise VerificationError(f"coset action violates relator {rel}")
    for w in table.subgroup_words:
        if table.scan_word_from(0, w) != 0:
            raise VerificationError("subgroup word does not fix the subgroup coset")
    return assignment
