"""Permutations, abstract generator words, and cycle-notation I/O.

Conventions, fixed project-wide:

* Points are 1-based in every piece of text I/O and 0-based internally.
  The conversion happens inside :func:`parse_cycles` and
  :meth:`Permutation.cycle_string` and nowhere else.
* Products apply left to right: ``p * q`` means "p first, then q", so
  ``(p * q)[x] == q[p[x]]``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .errors import (
    CycleFormatError,
    DegreeMismatchError,
    UnassignedGeneratorError,
    WordSyntaxError,
)

__all__ = [
    "Permutation",
    "Alphabet",
    "Word",
    "GeneratorAssignment",
    "S_ALPHABET",
    "V_ALPHABET",
    "XY_ALPHABET",
    "parse_cycles",
    "evaluate_word",
    "element_order",
    "embed_direct_product",
    "split_product",
]


class Permutation:
    """A bijection on ``{0..degree-1}`` stored as an immutable image array.

    >>> a = parse_cycles("(1,2,3)", 4)
    >>> b = parse_cycles("(1,2)", 4)
    >>> (a * b).cycle_string()
    '(2,3)'
    >>> (a * a.inverse()).is_identity()
    True
    """

    __slots__ = ("images", "_bytes")

    def __init__(self, images, _checked: bool = False):
        arr = np.asarray(images, dtype=np.int32)
        if not _checked:
            n = arr.shape[0]
            if arr.ndim != 1 or n == 0:
                raise ValueError("image array must be one-dimensional and nonempty")
            seen = np.zeros(n, dtype=bool)
            if arr.min() < 0 or arr.max() >= n:
                raise ValueError("image out of range; not a permutation")
            seen[arr] = True
            if not seen.all():
                raise ValueError("images repeat a point; not a permutation")
        arr = np.ascontiguousarray(arr)
        arr.flags.writeable = False
        self.images = arr
        self._bytes = arr.tobytes()

    @classmethod
    def identity(cls, degree: int) -> "Permutation":
        return cls(np.arange(degree, dtype=np.int32), _checked=True)

    @property
    def degree(self) -> int:
        return self.images.shape[0]

    def __mul__(self, other: "Permutation") -> "Permutation":
        if self.degree != other.degree:
            raise DegreeMismatchError(
                f"cannot compose degree {self.degree} with degree {other.degree}"
            )
        return Permutation(other.images[self.images], _checked=True)

    def inverse(self) -> "Permutation":
        inv = np.empty(self.degree, dtype=np.int32)
        inv[self.images] = np.arange(self.degree, dtype=np.int32)
        return Permutation(inv, _checked=True)

    def __pow__(self, n: int) -> "Permutation":
        if n == 0:
            return Permutation.identity(self.degree)
        if n < 0:
            return self.inverse() ** (-n)
        half = self ** (n >> 1)
        sq = half * half
        return sq * self if n & 1 else sq

    def __call__(self, point: int) -> int:
        return int(self.images[point])

    def __eq__(self, other) -> bool:
        return isinstance(other, Permutation) and self._bytes == other._bytes

    def __hash__(self) -> int:
        return hash(self._bytes)

    def is_identity(self) -> bool:
        return bool((self.images == np.arange(self.degree, dtype=np.int32)).all())

    def min_moved(self) -> int | None:
        """Smallest moved point, or None for the identity."""
        diff = np.nonzero(self.images != np.arange(self.degree, dtype=np.int32))[0]
        return int(diff[0]) if diff.size else None

    def cycles(self) -> list[list[int]]:
        """Nontrivial cycles (0-based), each starting at its least point,
        ordered by least moved point."""
        imgs = self.images
        seen = bytearray(self.degree)
        out = []
        for start in range(self.degree):
            if seen[start]:
                continue
            j = int(imgs[start])
            if j == start:
                seen[start] = 1
                continue
            cyc = [start]
            seen[start] = 1
            while j != start:
                cyc.append(j)
                seen[j] = 1
                j = int(imgs[j])
            out.append(cyc)
        return out

    def cycle_string(self) -> str:
        """Disjoint-cycle text (1-based), cycles sorted by least moved point.

        The empty product (identity) renders as ``()``.
        """
        cycs = self.cycles()
        if not cycs:
            return "()"
        return "".join("(" + ",".join(str(p + 1) for p in c) + ")" for c in cycs)

    def order(self) -> int:
        """Least k >= 1 with p**k = identity: the lcm of the cycle lengths."""
        imgs = self.images.tolist()
        seen = bytearray(self.degree)
        out = 1
        for start in range(self.degree):
            if seen[start]:
                continue
            seen[start] = 1
            length = 1
            j = imgs[start]
            while j != start:
                seen[j] = 1
                length += 1
                j = imgs[j]
            if length > 1:
                out = math.lcm(out, length)
        return out

    def cycle_type(self) -> tuple[tuple[int, int], ...]:
        """Multiset of nontrivial cycle lengths as sorted (length, count) pairs."""
        imgs = self.images.tolist()
        seen = bytearray(self.degree)
        counts: dict[int, int] = {}
        for start in range(self.degree):
            if seen[start]:
                continue
            seen[start] = 1
            length = 1
            j = imgs[start]
            while j != start:
                seen[j] = 1
                length += 1
                j = imgs[j]
            if length > 1:
                counts[length] = counts.get(length, 0) + 1
        return tuple(sorted(counts.items()))

    def __repr__(self) -> str:
        return f"Permutation({self.cycle_string()!r}, degree={self.degree})"


def parse_cycles(text: str, degree: int) -> Permutation:
    """Parse 1-based disjoint-cycle notation over ``1..degree``.

    Whitespace-tolerant. The empty string is the identity. Malformed syntax,
    points out of range and repeated points are reported with their character
    position.

    >>> parse_cycles("(1,2) (3,6)(4,7)", 8).cycle_string()
    '(1,2)(3,6)(4,7)'
    >>> parse_cycles("", 5).is_identity()
    True
    """
    if degree < 1:
        raise ValueError("degree must be positive")
    images = np.arange(degree, dtype=np.int32)
    seen: set[int] = set()
    i = 0
    n = len(text)

    def skip_ws(k: int) -> int:
        while k < n and text[k].isspace():
            k += 1
        return k

    i = skip_ws(i)
    while i < n:
        if text[i] != "(":
            raise CycleFormatError(f"expected '(' but found {text[i]!r}", i)
        i = skip_ws(i + 1)
        cycle: list[int] = []
        while True:
            start = i
            while i < n and text[i].isdigit():
                i += 1
            if start == i:
                raise CycleFormatError("expected a point number", i)
            point = int(text[start:i])
            if not 1 <= point <= degree:
                raise CycleFormatError(f"point {point} out of range 1..{degree}", start)
            if point in seen:
                raise CycleFormatError(f"point {point} repeated", start)
            seen.add(point)
            cycle.append(point - 1)
            i = skip_ws(i)
            if i < n and text[i] == ",":
                i = skip_ws(i + 1)
                continue
            if i < n and text[i] == ")":
                i += 1
                break
            raise CycleFormatError("expected ',' or ')'", i)
        for a, b in zip(cycle, cycle[1:]):
            images[a] = b
        if len(cycle) > 1:
            images[cycle[-1]] = cycle[0]
        i = skip_ws(i)
    return Permutation(images, _checked=True)


# ---------------------------------------------------------------------------
# Words over named generator alphabets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Alphabet:
    """A named, ordered generator alphabet with per-generator involution flags.

    The name is cosmetic; two alphabets are equal iff their symbols and
    involution flags coincide."""

    name: str = field(compare=False)
    symbols: tuple[str, ...] = ()
    involutory: tuple[bool, ...] = ()

    def __post_init__(self):
        if len(self.symbols) != len(self.involutory):
            raise ValueError("symbols and involutory flags must align")
        if len(set(self.symbols)) != len(self.symbols):
            raise ValueError("duplicate generator symbol")

    @property
    def size(self) -> int:
        return len(self.symbols)

    def index(self, symbol: str) -> int:
        return self.symbols.index(symbol)


S_ALPHABET = Alphabet("s", ("s0", "s1", "s2", "s3"), (True, True, True, True))
V_ALPHABET = Alphabet("v", ("v1", "v2", "v3", "v4", "v5", "v6"), (False,) * 6)
XY_ALPHABET = Alphabet("xy", ("x", "y"), (False, False))


@dataclass(frozen=True)
class Word:
    """A word over an alphabet: a sequence of (generator index, exponent +-1).

    The empty word is the identity of concatenation. For involutory
    generators free reduction normalizes exponents away.
    """

    alphabet: Alphabet
    letters: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        for idx, exp in self.letters:
            if not 0 <= idx < self.alphabet.size:
                raise ValueError(f"letter index {idx} outside alphabet {self.alphabet.name}")
            if exp not in (1, -1):
                raise ValueError("letter exponent must be +1 or -1")

    @classmethod
    def identity(cls, alphabet: Alphabet) -> "Word":
        return cls(alphabet, ())

    @classmethod
    def gen(cls, alphabet: Alphabet, index: int, exp: int = 1) -> "Word":
        return cls(alphabet, ((index, 1 if exp > 0 else -1),))

    def __len__(self) -> int:
        return len(self.letters)

    def __mul__(self, other: "Word") -> "Word":
        if self.alphabet is not other.alphabet and self.alphabet != other.alphabet:
            raise ValueError("cannot concatenate words over different alphabets")
        return Word(self.alphabet, self.letters + other.letters)

    def inverse(self) -> "Word":
        return Word(
            self.alphabet,
            tuple((idx, -exp) for idx, exp in reversed(self.letters)),
        )

    def __pow__(self, n: int) -> "Word":
        if n == 0:
            return Word.identity(self.alphabet)
        base = self if n > 0 else self.inverse()
        return Word(self.alphabet, base.letters * abs(n))

    def conjugated_by(self, w: "Word") -> "Word":
        """w^-1 * self * w."""
        return w.inverse() * self * w

    def free_reduce(self, respect_involutions: bool = True) -> "Word":
        """Cancel adjacent inverse pairs.

        With `respect_involutions` (the default) involutory letters count as
        self-inverse and their exponents are normalized away; without it the
        reduction is the plain free-group one, which is what relators want.
        """
        inv = self.alphabet.involutory
        out: list[tuple[int, int]] = []
        for idx, exp in self.letters:
            treat_inv = respect_involutions and inv[idx]
            if treat_inv:
                exp = 1
            if out and out[-1][0] == idx and (treat_inv or out[-1][1] == -exp):
                out.pop()
            else:
                out.append((idx, exp))
        return Word(self.alphabet, tuple(out))

    def substitute(self, replacements: Sequence["Word"]) -> "Word":
        """Rewrite each generator i as replacements[i] (exponents respected)."""
        if len(replacements) != self.alphabet.size:
            raise ValueError("need one replacement word per generator")
        target = replacements[0].alphabet if replacements else self.alphabet
        letters: list[tuple[int, int]] = []
        for idx, exp in self.letters:
            rep = replacements[idx] if exp == 1 else replacements[idx].inverse()
            letters.extend(rep.letters)
        return Word(target, tuple(letters))

    def syllables(self) -> Iterator[tuple[int, int]]:
        """Yield (index, signed run length) for maximal runs of one letter."""
        run_idx, run = None, 0
        for idx, exp in self.letters:
            if idx == run_idx and (exp > 0) == (run > 0):
                run += exp
            else:
                if run_idx is not None:
                    yield run_idx, run
                run_idx, run = idx, exp
        if run_idx is not None:
            yield run_idx, run

    def __str__(self) -> str:
        if not self.letters:
            return "<identity>"
        parts = []
        for idx, run in self.syllables():
            sym = self.alphabet.symbols[idx]
            parts.append(sym if run == 1 else f"{sym}^{run}")
        return " ".join(parts)

    @classmethod
    def parse(cls, text: str, alphabet: Alphabet) -> "Word":
        """Parse word text: whitespace-separated generator tokens with optional
        ``^k`` suffixes and parenthesized groups, e.g. ``(s0 s1 s2)^5 s3``.

        A bare ``^k`` with nothing to attach to is rejected.
        """
        tokens = _tokenize_word(text)
        word, pos = _parse_word_seq(tokens, 0, alphabet, stop_at_paren=False)
        if pos != len(tokens):
            raise WordSyntaxError("unexpected ')'", tokens[pos][1])
        return word


def _tokenize_word(text: str) -> list[tuple[str, int, bool]]:
    """Tokens are (text, position, adjacent-to-previous-token)."""
    tokens: list[tuple[str, int, bool]] = []
    i, n = 0, len(text)
    prev_end = -1
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        adjacent = i == prev_end
        if ch in "()":
            tokens.append((ch, i, adjacent))
            i += 1
        elif ch == "^":
            j = i + 1
            if j < n and text[j] == "-":
                j += 1
            start_digits = j
            while j < n and text[j].isdigit():
                j += 1
            if j == start_digits:
                raise WordSyntaxError("expected an integer after '^'", i)
            tokens.append((text[i:j], i, adjacent))
            i = j
        elif ch.isalpha():
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append((text[i:j], i, adjacent))
            i = j
        else:
            raise WordSyntaxError(f"unexpected character {ch!r}", i)
        prev_end = i
    return tokens


def _parse_word_seq(tokens, pos, alphabet, stop_at_paren):
    items: list[Word] = []
    while pos < len(tokens):
        tok, where, _ = tokens[pos]
        if tok == ")":
            if stop_at_paren:
                break
            raise WordSyntaxError("unbalanced ')'", where)
        if tok == "(":
            inner, pos = _parse_word_seq(tokens, pos + 1, alphabet, stop_at_paren=True)
            if pos >= len(tokens) or tokens[pos][0] != ")":
                raise WordSyntaxError("unbalanced '('", where)
            pos += 1
            exp, pos = _maybe_exponent(tokens, pos)
            items.append(inner**exp)
            continue
        if tok.startswith("^"):
            raise WordSyntaxError("exponent must attach to a generator or group", where)
        try:
            idx = alphabet.index(tok)
        except ValueError:
            raise WordSyntaxError(
                f"unknown generator {tok!r} for alphabet {alphabet.name!r}", where
            ) from None
        pos += 1
        exp, pos = _maybe_exponent(tokens, pos)
        items.append(Word.gen(alphabet, idx) ** exp)
    word = Word.identity(alphabet)
    for item in items:
        word = word * item
    return word, pos


def _maybe_exponent(tokens, pos):
    # an exponent binds only when written flush against its target:
    # "(s0 s1 s2)^5" is a power, "s0 s1 s2 ^5" is a syntax error upstream
    if pos < len(tokens) and tokens[pos][0].startswith("^") and tokens[pos][2]:
        return int(tokens[pos][0][1:]), pos + 1
    return 1, pos


# ---------------------------------------------------------------------------
# Evaluating words through generator assignments
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GeneratorAssignment:
    """One permutation per alphabet generator, all of equal degree."""

    alphabet: Alphabet
    perms: tuple[Permutation, ...]

    def __post_init__(self):
        if len(self.perms) != self.alphabet.size:
            raise UnassignedGeneratorError(
                f"alphabet {self.alphabet.name!r} has {self.alphabet.size} generators, "
                f"got {len(self.perms)} assignments"
            )
        degrees = {p.degree for p in self.perms}
        if len(degrees) > 1:
            raise DegreeMismatchError(f"assigned permutations mix degrees {sorted(degrees)}")

    @property
    def degree(self) -> int:
        return self.perms[0].degree


def evaluate_word(word: Word, assignment: GeneratorAssignment) -> Permutation:
    """Product of the assigned permutations in word order (left-to-right)."""
    if word.alphabet != assignment.alphabet:
        raise UnassignedGeneratorError(
            f"word over alphabet {word.alphabet.name!r} evaluated against "
            f"{assignment.alphabet.name!r}"
        )
    arr = np.arange(assignment.degree, dtype=np.int32)
    inverses: dict[int, np.ndarray] = {}
    for idx, exp in word.letters:
        if exp == 1 or assignment.alphabet.involutory[idx]:
            g = assignment.perms[idx].images
        else:
            if idx not in inverses:
                inverses[idx] = assignment.perms[idx].inverse().images
            g = inverses[idx]
        arr = g[arr]
    return Permutation(arr, _checked=True)


def element_order(p: Permutation) -> int:
    return p.order()


def embed_direct_product(p: Permutation, q: Permutation) -> Permutation:
    """Act as p on the first block of points and as q, shifted, on the second."""
    images = np.concatenate([p.images, q.images + p.degree])
    return Permutation(images, _checked=True)


def split_product(p: Permutation, m: int) -> tuple[Permutation, Permutation]:
    """Split a degree m+n permutation preserving the blocks {0..m-1}, {m..}."""
    head = p.images[:m]
    tail = p.images[m:]
    if head.max(initial=-1) >= m or (tail.min(initial=p.degree) < m and tail.size):
        raise ValueError("permutation does not preserve the product blocks")
    return (
        Permutation(head, _checked=True),
        Permutation(tail - m, _checked=True),
    )
