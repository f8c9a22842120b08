"""Bundled expected-value tables and report diffing.

The CSV ships the census rows with the group label next to every derived
number, so audits can re-derive each order from its label through
:func:`parse_label_order`. Loading validates the schema, the label/order
agreement, and the facet conservation identity d*|N| + h*|N|/2 = 5 003 460
on every facet-bearing row.
"""
from __future__ import annotations

import csv
import math
import re
from dataclasses import dataclass
from io import StringIO

from .build import data_text
from .errors import SchemaError

__all__ = [
    "ExpectedRow",
    "parse_label_order",
    "load_expected_tables",
    "RowDiff",
    "CompareResult",
    "compare_rows",
]

FACET_POINTS = 5_003_460


@dataclass(frozen=True)
class ExpectedRow:
    table: int
    row: int
    group_label: str
    group_order: int
    facet_d: int | None
    facet_h: int | None
    aut_label: str | None
    aut_order: int | None
    subgroups: tuple[int, ...]
    note: str = ""


_TOKEN = re.compile(
    r"\s*(J_1|L_2\((\d+)\)|A_(\d+)|S_(\d+)|D_(\d+)|C_(\d+)|(\d+)|\^|x|:|\.|\(|\))"
)


def _label_tokens(label: str) -> list[str]:
    out, pos = [], 0
    while pos < len(label):
        m = _TOKEN.match(label, pos)
        if not m:
            raise SchemaError(f"cannot tokenize group label {label!r} at {pos}")
        out.append(m.group(1))
        pos = m.end()
    return out


def parse_label_order(label: str) -> int:
    """Order of the group a census label denotes.

    Supported algebra: direct (x) and semidirect (:) products and the
    non-split extension dot all multiply orders; ^ is repeated direct
    product; atoms are cyclic orders (bare or C_k), dihedral D_k of order k,
    alternating/symmetric A_k/S_k, the first factor J_1, and L_2(q).
    """
    tokens = _label_tokens(label)
    pos = 0

    def atom() -> int:
        nonlocal pos
        if pos >= len(tokens):
            raise SchemaError(f"truncated group label {label!r}")
        tok = tokens[pos]
        if tok == "(":
            pos += 1
            value = expr()
            if pos >= len(tokens) or tokens[pos] != ")":
                raise SchemaError(f"unbalanced parenthesis in label {label!r}")
            pos += 1
            return value
        pos += 1
        if tok == "J_1":
            return 175_560
        m = re.fullmatch(r"L_2\((\d+)\)", tok)
        if m:
            q = int(m.group(1))
            return q * (q * q - 1) // 2
        m = re.fullmatch(r"A_(\d+)", tok)
        if m:
            return math.factorial(int(m.group(1))) // 2
        m = re.fullmatch(r"S_(\d+)", tok)
        if m:
            return math.factorial(int(m.group(1)))
        m = re.fullmatch(r"D_(\d+)", tok)
        if m:
            return int(m.group(1))
        m = re.fullmatch(r"C_(\d+)", tok)
        if m:
            return int(m.group(1))
        if tok.isdigit():
            return int(tok)
        raise SchemaError(f"unexpected token {tok!r} in group label {label!r}")

    def term() -> int:
        nonlocal pos
        value = atom()
        if pos < len(tokens) and tokens[pos] == "^":
            pos += 1
            exp_val = atom()
            value = value**exp_val
        return value

    def expr() -> int:
        nonlocal pos
        value = term()
        while pos < len(tokens) and tokens[pos] in ("x", ":", "."):
            pos += 1
            value *= term()
        return value

    value = expr()
    if pos != len(tokens):
        raise SchemaError(f"trailing tokens in group label {label!r}")
    return value


def load_expected_tables() -> tuple[ExpectedRow, ...]:
    rows: list[ExpectedRow] = []
    seen: set[int] = set()
    reader = csv.DictReader(StringIO(data_text("expected_tables.csv")))
    for lineno, rec in enumerate(reader, start=2):
        try:
            table = int(rec["table"])
            row_id = int(rec["row"])
            label = rec["group_label"].strip()
            order = int(rec["group_order"])
            d = int(rec["facet_d"]) if rec["facet_d"] else None
            h = int(rec["facet_h"]) if rec["facet_h"] else None
            aut_label = rec["aut_label"].strip() or None
            aut_order = int(rec["aut_order"]) if rec["aut_order"] else None
            subs = tuple(int(x) for x in rec["subgroups"].split(";") if x)
            note = rec.get("note", "") or ""
        except (KeyError, ValueError) as exc:
            raise SchemaError(f"malformed expected row: {exc}", lineno) from exc
        if table not in (1, 2, 3, 4):
            raise SchemaError(f"table id {table} out of range", lineno)
        if row_id in seen:
            raise SchemaError(f"duplicate row key {row_id}", lineno)
        seen.add(row_id)
        if order < 1 or (d is not None and d < 0) or (h is not None and h < 0):
            raise SchemaError("orders and counts must be positive", lineno)
        if parse_label_order(label) != order:
            raise SchemaError(
                f"label {label!r} implies order {parse_label_order(label)}, "
                f"row says {order}",
                lineno,
            )
        if aut_label is not None and aut_order is not None:
            if parse_label_order(aut_label) != aut_order:
                raise SchemaError(
                    f"aut label {aut_label!r} disagrees with {aut_order}", lineno
                )
        if d is not None and h is not None:
            if 2 * d * order + h * order != 2 * FACET_POINTS:
                raise SchemaError(
                    f"facet identity fails: {d}*{order} + {h}*{order}/2 != {FACET_POINTS}",
                    lineno,
                )
        rows.append(
            ExpectedRow(table, row_id, label, order, d, h, aut_label, aut_order, subs, note)
        )
    return tuple(rows)


def expected_by_row() -> dict[int, ExpectedRow]:
    return {r.row: r for r in load_expected_tables()}


# ---------------------------------------------------------------------------
# report diffing
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RowDiff:
    row: int
    status: str  # match | mismatch | missing-computed | missing-expected
    fields: tuple[tuple[str, object, object], ...] = ()  # (field, computed, expected)


@dataclass
class CompareResult:
    diffs: tuple[RowDiff, ...]

    @property
    def matches(self) -> int:
        return sum(1 for d in self.diffs if d.status == "match")

    @property
    def mismatches(self) -> int:
        return sum(1 for d in self.diffs if d.status == "mismatch")

    @property
    def missing(self) -> int:
        return sum(1 for d in self.diffs if d.status.startswith("missing"))

    def to_dict(self) -> dict:
        return {
            "summary": {
                "match": self.matches,
                "mismatch": self.mismatches,
                "missing": self.missing,
            },
            "rows": [
                {
                    "row": d.row,
                    "status": d.status,
                    "fields": [
                        {"field": f, "computed": c, "expected": e}
                        for f, c, e in d.fields
                    ],
                }
                for d in self.diffs
            ],
        }


def compare_rows(computed: dict[int, dict], expected: dict[int, ExpectedRow]) -> CompareResult:
    """Diff computed census rows against expected rows sharing keys.

    Computed rows are dicts with any of the keys order, facet_d, facet_h,
    aut_order (None values are skipped, for checks that were not run).
    """
    diffs: list[RowDiff] = []
    order_key = sorted(set(computed) | set(expected))
    for row_id in order_key:
        got = computed.get(row_id)
        want = expected.get(row_id)
        if got is None:
            diffs.append(RowDiff(row_id, "missing-computed"))
            continue
        if want is None:
            diffs.append(RowDiff(row_id, "missing-expected"))
            continue
        bad = []
        for field, expected_value in (
            ("order", want.group_order),
            ("facet_d", want.facet_d),
            ("facet_h", want.facet_h),
            ("aut_order", want.aut_order),
        ):
            comp = got.get(field)
            if comp is None or expected_value is None:
                continue
            if comp != expected_value:
                bad.append((field, comp, expected_value))
        diffs.append(RowDiff(row_id, "mismatch" if bad else "match", tuple(bad)))
    return CompareResult(tuple(sorted(diffs, key=lambda d: d.row)))
