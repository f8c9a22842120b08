"""Command-line front end.

Verbs: build, enumerate, verify-cgroup, check-semisparse, census, catalog,
compare, run-all. Canonical output is JSON (sorted keys, no timing data, so
equal configurations produce byte-identical reports); --out-dir additionally
writes a CSV rendering and matplotlib figures next to it.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from pathlib import Path

from .build import get_universe
from .census import quotient_report
from .coset_enum import Presentation, coset_action, enumerate_cosets
from .errors import EngineError, SchemaError
from .expected import compare_rows, expected_by_row
from .perms import Word
from .pipeline import ALL_CHECKS, RunConfig, exit_code_for, run_pipeline
from .semisparse import is_semisparse, structure_fingerprint, table1_catalog
from .stabchain import build_chain
from .subgroups import BUILTIN_NAMES, SubgroupSpec, builtin_spec, realize

BUNDLED_PRESENTATIONS = ("w", "w-prime", "w-doubleprime", "l-xy")


def canonical_json(payload) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n"


def emit(payload: dict, args, csv_rows=None, csv_fields=None, figures=()) -> None:
    text = canonical_json(payload)
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(text)
        if csv_rows is not None:
            with open(out / "report.csv", "w", newline="") as fh:
                writer = csv.DictWriter(fh, fieldnames=csv_fields)
                writer.writeheader()
                writer.writerows(csv_rows)
        for render in figures:
            render(out)
        print(f"report written to {out}", file=sys.stderr)
    if args.format == "json" or not args.out_dir:
        sys.stdout.write(text)


def load_presentation_arg(name_or_path: str) -> Presentation:
    if name_or_path in BUNDLED_PRESENTATIONS:
        from .build import load_presentation

        return load_presentation(name_or_path.replace("-", "_"))
    return Presentation.from_file(name_or_path)


def load_word_file(path: str, alphabet) -> tuple[Word, ...]:
    out = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            out.append(Word.parse(line, alphabet))
        except EngineError as err:
            raise SchemaError(f"bad word: {err}", lineno) from err
    return tuple(out)


# census rows of the named builtins; nu2's row among the two order-3 classes
# is decided by its computed normalizer quotient (68400)
BUILTIN_CENSUS_ROWS = {
    "trivial": 145,
    "omega": 143,
    "nu3": 144,
    "nu2": 142,
    "n-prime": 2,
    "n-doubleprime": 1,
}


def resolve_subgroup(text: str, universe) -> tuple[SubgroupSpec, int | None]:
    if text.startswith("table1:"):
        row_id = int(text.split(":", 1)[1])
        for row in table1_catalog():
            if row.row == row_id:
                return row.spec(), row.census_row
        raise EngineError(f"no catalog row {row_id}")
    if text.startswith("builtin:"):
        text = text.split(":", 1)[1]
    if text in BUILTIN_NAMES:
        return builtin_spec(text, universe), BUILTIN_CENSUS_ROWS.get(text)
    from .perms import S_ALPHABET

    words = load_word_file(text, S_ALPHABET)
    return SubgroupSpec(Path(text).stem, words), None


# ---------------------------------------------------------------------------
# verbs
# ---------------------------------------------------------------------------


def cmd_build(args) -> int:
    t0 = time.time()
    universe = get_universe(args.cache_dir)
    payload = {
        "full_group_order": universe.w_chain.order,
        "first_factor_order": universe.j1_chain.order,
        "second_factor_order": universe.factor2.order,
        "degree": universe.w_gens[0].degree,
        "base": list(universe.w_chain.base),
    }
    print(f"built in {time.time() - t0:.1f}s", file=sys.stderr)
    emit(payload, args)
    return 0


def cmd_enumerate(args) -> int:
    pres = load_presentation_arg(args.pres)
    words = load_word_file(args.subgroup, pres.alphabet) if args.subgroup else ()
    t0 = time.time()
    table = enumerate_cosets(
        pres, words, max_cosets=args.max_cosets, strategy=args.strategy
    )
    payload = {
        "presentation": pres.name,
        "strategy": args.strategy,
        "index": table.index,
        "cosets_defined": table.total_defined,
    }
    if args.action_order:
        payload["action_order"] = build_chain(coset_action(table).perms).order
    print(f"enumerated in {time.time() - t0:.1f}s", file=sys.stderr)
    emit(payload, args)
    return 0


def cmd_verify_cgroup(args) -> int:
    universe = get_universe(args.cache_dir)
    mg = universe.marked_group(args.group)
    verdict = mg.intersection_property()
    parabolic = {}
    for mask in range(1, 1 << mg.rank):
        idx = frozenset(i for i in range(mg.rank) if mask >> i & 1)
        name = "H{" + ",".join(str(i) for i in sorted(idx)) + "}"
        parabolic[name] = mg.parabolic(idx).order
    payload = {
        "group": args.group,
        "order": mg.chain.order,
        "coxeter_matrix": mg.coxeter_matrix(),
        "schlafli": mg.schlafli_symbol(),
        "parabolic_orders": parabolic,
        "intersection_property": verdict.ok,
    }
    if not verdict.ok:
        I, J, witness = verdict.witness
        payload["witness"] = {
            "I": sorted(I), "J": sorted(J), "element": witness.cycle_string()
        }
    emit(payload, args)
    return 0 if verdict.ok else 1


def cmd_check_semisparse(args) -> int:
    universe = get_universe(args.cache_dir)
    spec, _row = resolve_subgroup(args.subgroup, universe)
    sub = realize(spec, universe)
    verdict = is_semisparse(sub, universe)
    payload = {
        "subgroup": spec.name,
        "order": sub.order,
        "semisparse": verdict.ok,
    }
    if spec.label:
        payload["label"] = spec.label
    if not verdict.ok:
        n, s = verdict.witness
        payload["witness"] = {
            "element_order": n.order(),
            "product_set_element_order": s.order(),
            "element": n.cycle_string(),
            "product_set_element": s.cycle_string(),
        }
    if args.fingerprint:
        fp = structure_fingerprint(sub, with_exponent=sub.order <= 10_000)
        payload["fingerprint"] = {
            "order": fp.order,
            "exponent": fp.exponent,
            "center_order": fp.center_order,
            "abelian_invariants": list(fp.abelian_invariants),
            "perfect": fp.perfect,
            "solvable": fp.solvable,
        }
    emit(payload, args)
    return 0


def cmd_census(args) -> int:
    universe = get_universe(args.cache_dir)
    spec, row_id = resolve_subgroup(args.subgroup, universe)
    sub = realize(spec, universe)
    ranks = tuple(int(r) for r in args.ranks.split(",")) if args.ranks else (3,)
    report = quotient_report(
        universe, sub, ranks=ranks, with_aut=args.aut, max_orbit=args.max_orbit
    )
    payload = {
        "name": report.name,
        "row": row_id,
        "order": report.order,
        "facet_d": report.facet_d,
        "facet_h": report.facet_h,
        "vertex_count": report.vertex_count,
        "edge_count": report.edge_count,
        "face2_count": report.face2_count,
        "uniform_facets": report.uniform_facets,
        "aut_order": report.aut_order,
    }
    if report.aut_skipped:
        payload["aut_skipped"] = report.aut_skipped
    row = dict(payload)
    from .figures import render_census_figure

    emit(
        payload,
        args,
        csv_rows=[row],
        csv_fields=list(row),
        figures=[lambda out: render_census_figure([row], out / "census_facets.png")],
    )
    return 0


def cmd_catalog(args) -> int:
    universe = get_universe(args.cache_dir)
    rows = []
    for row in table1_catalog():
        sub = realize(row.spec(), universe)
        entry = {
            "row": row.row,
            "label": row.label,
            "order": sub.order,
            "expected_order": row.order,
            "census_row": row.census_row,
        }
        if args.verdicts:
            verdict = is_semisparse(sub, universe)
            entry["semisparse"] = verdict.ok
        rows.append(entry)
    payload = {"rows": rows, "count": len(rows)}
    from .figures import render_catalog_figure

    figures = []
    if args.verdicts:
        figures.append(lambda out: render_catalog_figure(rows, out / "catalog_orders.png"))
    emit(payload, args, csv_rows=rows, csv_fields=list(rows[0]), figures=figures)
    return 0


def cmd_compare(args) -> int:
    computed = json.loads(Path(args.report).read_text())
    rows = computed.get("rows", [computed] if "facet_d" in computed else [])
    by_row: dict[int, dict] = {}
    for row in rows:
        key = row.get("row")
        if key is None:
            continue
        by_row[int(key)] = row
    expected = expected_by_row()
    result = compare_rows(by_row, {k: v for k, v in expected.items() if k in by_row})
    payload = result.to_dict()
    from .figures import render_compare_figure

    flat = [
        {"row": d["row"], "status": d["status"],
         "fields": ";".join(f"{f['field']}={f['computed']}/{f['expected']}"
                            for f in d["fields"])}
        for d in payload["rows"]
    ]
    emit(
        payload,
        args,
        csv_rows=flat,
        csv_fields=["row", "status", "fields"],
        figures=[lambda out: render_compare_figure(payload, out / "compare_status.png")],
    )
    return 0 if result.mismatches == 0 else 1


def cmd_run_all(args) -> int:
    universe = get_universe(args.cache_dir)
    selected = None
    if args.checks is not None:
        selected = tuple(c for c in args.checks.split(",") if c)
    cfg = RunConfig.from_env(
        strategy=args.strategy,
        extended=args.extended,
        checks=selected,
    )
    if args.workers is not None:
        cfg.workers = args.workers
    if args.max_orbit is not None:
        cfg.max_orbit = args.max_orbit
    t0 = time.time()
    results = run_pipeline(universe, cfg)
    print(f"pipeline finished in {time.time() - t0:.1f}s", file=sys.stderr)
    checks = [r.to_dict() for r in results]
    payload = {
        "config": {
            "strategy": cfg.strategy,
            "workers": cfg.workers,
            "max_orbit": cfg.max_orbit,
            "extended": cfg.extended,
            "checks": list(ALL_CHECKS if cfg.checks is None else cfg.checks),
        },
        "checks": checks,
    }
    for r in results:
        print(f"{r.id}: {r.status}", file=sys.stderr)
    from .figures import render_check_figure

    emit(
        payload,
        args,
        csv_rows=[{"id": c["id"], "status": c["status"]} for c in checks],
        csv_fields=["id", "status"],
        figures=[lambda out: render_check_figure(checks, out / "checks.png")],
    )
    return exit_code_for(results)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polytope535",
        description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--cache-dir", default=None,
                        help="directory for chain/table caches "
                             "(or POLYTOPE535_CACHE_DIR)")
    parser.add_argument("--format", choices=("json", "csv", "text"), default="json")
    parser.add_argument("--out-dir", default=None,
                        help="write report.json, report.csv and figures here")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="construct and cache the permutation model")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("enumerate", help="Todd-Coxeter coset enumeration")
    p.add_argument("--pres", required=True,
                   help=f"presentation file or one of {BUNDLED_PRESENTATIONS}")
    p.add_argument("--subgroup", default=None, help="subgroup generator word file")
    p.add_argument("--strategy", choices=("hlt", "felsch"), default="hlt")
    p.add_argument("--max-cosets", type=int, default=20_000_000)
    p.add_argument("--action-order", action="store_true",
                   help="also compute the coset action's group order")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("verify-cgroup", help="Coxeter matrix, parabolic orders, "
                                             "intersection property")
    p.add_argument("--group", choices=("w", "w-prime", "w-doubleprime"), default="w")
    p.set_defaults(func=cmd_verify_cgroup)

    p = sub.add_parser("check-semisparse", help="semisparse verdict for a subgroup")
    p.add_argument("--subgroup", required=True,
                   help="word file, table1:<row>, or builtin:<name>")
    p.add_argument("--fingerprint", action="store_true")
    p.set_defaults(func=cmd_check_semisparse)

    p = sub.add_parser("census", help="quotient face census for a subgroup")
    p.add_argument("--subgroup", required=True)
    p.add_argument("--ranks", default="3", help="comma-separated ranks (default 3)")
    p.add_argument("--aut", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--max-orbit", type=int, default=600_000)
    p.set_defaults(func=cmd_census)

    p = sub.add_parser("catalog", help="the 30 catalog rows with orders and verdicts")
    p.add_argument("--table1", action="store_true", default=True)
    p.add_argument("--verdicts", action=argparse.BooleanOptionalAction, default=True)
    p.set_defaults(func=cmd_catalog)

    p = sub.add_parser("compare", help="diff a census report against the bundled tables")
    p.add_argument("--report", required=True, help="JSON report file")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("run-all", help="the full verification pipeline")
    p.add_argument("--checks", default=None,
                   help=f"comma-separated subset of {tuple(ALL_CHECKS)}")
    p.add_argument("--strategy", choices=("hlt", "felsch"), default="hlt")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--max-orbit", type=int, default=None)
    p.add_argument("--extended", action="store_true",
                   help="include long-running checks (large normalizer orbits)")
    p.set_defaults(func=cmd_run_all)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SchemaError as err:
        print(f"data error: {err}", file=sys.stderr)
        return 2
    except EngineError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
