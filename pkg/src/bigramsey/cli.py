"""Command-line front end.

Exit codes: 0 success, 1 a checker reported a failure, 2 usage error
(bad flags, unknown template, malformed input, insufficient depth).
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field

from .antichain import build_good_dca, canonical_envelope, check_good, envelope_violations
from .coding_tree import SCHEDULES, CodingTree, InsufficientDepth, Node, build_tree
from .degrees import DEFAULT_DEPTHS, DEFAULT_SCHEDULE, big_ramsey_degree, default_mode
from .fraisse import (
    FiniteStructure,
    StructureError,
    TemplateError,
    parse_structure,
    template_by_name,
)
from .ramsey_space import (
    Approximation,
    basic_set_correspondence,
    find_instance,
    is_front,
    is_nash_williams,
    partition_problems,
    pigeonhole_search,
    random_front,
    rightmost_coloring,
    side_coloring,
    sub_dca_census,
    theta_inverse,
    theta_map,
)

FORMAT_VERSION = 1


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    subcommand: str
    template: str = "q"
    mode: str | None = None
    depth: int | None = None
    depths: tuple = ()
    fmt: str = "text"
    options: dict = field(default_factory=dict)


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bigramsey", description="Big Ramsey degrees via coding trees of 1-types.")
    sub = p.add_subparsers(dest="subcommand", required=True)

    def common(sp, depth_help, fmts=("text", "json")):
        sp.add_argument("--template", default="q", help="template name (rado, q, q_<k>, kpartite_<k>, ...)")
        sp.add_argument("--mode", choices=("S", "U"), default=None, help="coding tree kind")
        sp.add_argument("--depth", type=int, default=None, help=depth_help)
        sp.add_argument("--format", dest="fmt", choices=fmts, default="text")
        sp.add_argument("--out", default=None, help="write the output to this file")

    sp = sub.add_parser("build-tree", help="build and export a truncated coding tree")
    common(sp, "number of levels (coding nodes)", ("text", "dot", "json"))
    sp.add_argument("--schedule", choices=SCHEDULES, default=DEFAULT_SCHEDULE)

    sp = sub.add_parser("degree", help="count similarity types of antichains coding a structure")
    common(sp, "single enumeration depth")
    sp.add_argument("--depths", default=None, help="comma-separated increasing depth schedule")
    sp.add_argument("--size", type=int, default=None, help="size of the target (templates with one structure per size)")
    sp.add_argument("--target", default=None, help="structure file")
    sp.add_argument("--schedule", choices=SCHEDULES, default=DEFAULT_SCHEDULE)
    sp.add_argument("--ordered", action="store_true", help="count only the given enumeration of the target")
    sp.add_argument("--emit-codes", action="store_true", help="print the catalogue of similarity codes")

    sp = sub.add_parser("good-dca", help="build a good diagonal coding antichain and audit it")
    common(sp, "number of coding nodes", ("text", "dot", "json"))
    sp.add_argument("--mutate", choices=("delete-branch", "flip"), default=None,
                    help="damage the antichain before auditing it")
    sp.add_argument("--at", type=int, default=0, help="index used by --mutate")

    sp = sub.add_parser("envelope", help="canonical envelope of coding nodes of a good antichain")
    common(sp, "number of coding nodes of the ambient antichain", ("text", "dot", "json"))
    sp.add_argument("--nodes", required=True, help="comma-separated coding node indices")

    sp = sub.add_parser("pigeonhole", help="monochromatic witnesses for colorings of r_{k+1}-extensions")
    common(sp, "number of coding nodes of the ambient antichain")
    sp.add_argument("--case", default="a.i", help="a.i, a.ii, b.i or b.ii")
    sp.add_argument("--k", type=int, default=None)
    sp.add_argument("--sweep", action="store_true", help="try every 2-coloring")
    sp.add_argument("--coloring", default="side",
                    help="side (leftmost or not new critical node), rightmost (top level reaches M's "
                         "rightmost branch or not), constant, or a 0/1 string")
    sp.add_argument("--min-size", type=int, default=2, help="least number of extensions in a witness")

    sp = sub.add_parser("front-check", help="decide whether a family of approximations is a front")
    common(sp, "number of coding nodes of the ambient antichain")
    sp.add_argument("--census-size", type=int, default=None, help="coding nodes of the sub-antichains checked")
    sp.add_argument("--family", default=None, help="file with one approximation per line (node labels)")
    sp.add_argument("--k", type=int, default=1, help="level of a generated front")
    sp.add_argument("--seed", type=int, default=0, help="seed of a generated front")
    sp.add_argument("--refinements", type=int, default=3, help="refinement steps of a generated front")

    sp = sub.add_parser("theta", help="vertex sets versus sub-antichains")
    common(sp, "number of coding nodes of the ambient antichain")
    sp.add_argument("--vertices", default=None, help="comma-separated vertex indices to map")
    return p


def _ints(text: str, flag: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"{flag} expects comma-separated integers, got {text!r}") from None


def _template(name):
    try:
        return template_by_name(name)
    except TemplateError as e:
        raise UsageError(str(e)) from None


def _dca(cfg: RunConfig, default: int):
    tmpl = _template(cfg.template)
    mode = cfg.mode or default_mode(tmpl)
    n = default if cfg.depth is None else cfg.depth
    if n < 1:
        raise UsageError("--depth must be at least 1")
    return build_good_dca(CodingTree(tmpl, mode), n)


def _emit(cfg: RunConfig, data: dict, text: str) -> str:
    if cfg.fmt == "json":
        return json.dumps({"format_version": FORMAT_VERSION, **data}, indent=1, sort_keys=True) + "\n"
    return text if text.endswith("\n") else text + "\n"


def _build_tree(cfg):
    tmpl = _template(cfg.template)
    depth = 4 if cfg.depth is None else cfg.depth
    if depth < 0:
        raise UsageError("--depth must be non-negative")
    T = build_tree(tmpl, cfg.mode or default_mode(tmpl), depth, cfg.options["schedule"])
    if cfg.fmt == "dot":
        return 0, T.to_dot()
    if cfg.fmt == "json":
        return 0, T.to_json() + "\n"
    lines = [f"template {tmpl.name}, mode {T.mode}, depth {T.depth}"]
    for n, lvl in enumerate(T.levels):
        cells = [t.label() + ("*" if T.is_coding(t) else "") for t in lvl]
        lines.append(f"level {n} ({len(lvl)}): " + " ".join(cells))
    return 0, "\n".join(lines) + "\n"


def _target(cfg, tmpl) -> FiniteStructure:
    o = cfg.options
    if (o["size"] is None) == (o["target"] is None):
        raise UsageError("give exactly one of --size and --target")
    if o["target"] is not None:
        try:
            with open(o["target"]) as fh:
                return parse_structure(fh.read(), tmpl.signature)
        except OSError as e:
            raise UsageError(f"cannot read structure file: {e}") from None
    n = o["size"]
    if n < 1:
        raise UsageError("--size must be at least 1")
    if tmpl.kind != "linear_order":
        raise UsageError(f"--size needs a template with one structure per size (q); "
                         f"give --target FILE for {tmpl.name}")
    return FiniteStructure.build(tmpl.signature, (0,) * n, [("<", i, j) for i in range(n) for j in range(i + 1, n)])


def _degree(cfg):
    tmpl = _template(cfg.template)
    A = _target(cfg, tmpl)
    if cfg.depths:
        depths = list(cfg.depths)
    elif cfg.depth is not None:
        depths = [cfg.depth]
    else:
        depths = list(DEFAULT_DEPTHS)
    if depths != sorted(set(depths)) or depths[0] < 1:
        raise UsageError("--depths must be strictly increasing positive integers")
    res = big_ramsey_degree(A, tmpl, depths, cfg.mode, cfg.options["schedule"], cfg.options["ordered"])
    codes = sorted(c.text for c in res.codes)
    lines = [f"depth {d}: {k}" for d, k in res.stabilization]
    lines.append(f"stabilized: {'yes' if res.stabilized else 'no'}")
    if cfg.options["emit_codes"]:
        lines.extend(f"code {c}" for c in codes)
    lines.append(f"degree: {res.degree}")
    data = {"trace": res.stabilization, "stabilized": res.stabilized, "degree": res.degree,
            "census": res.census_size}
    if cfg.options["emit_codes"]:
        data["codes"] = codes
    return 0, _emit(cfg, data, "\n".join(lines))


def _good_dca(cfg):
    o = cfg.options
    M = _dca(cfg, 6)
    if o["mutate"] == "delete-branch":
        if not 0 <= o["at"] < len(M.tops):
            raise UsageError(f"--at must be in 0..{len(M.tops) - 1}")
        M = M.without_top(o["at"])
    elif o["mutate"] == "flip":
        if not 0 <= o["at"] < M.n_coding:
            raise UsageError(f"--at must be in 0..{M.n_coding - 1}")
        M = build_good_dca(CodingTree(M.template, M.mode), M.n_coding, flip_at=(o["at"],))
    rep = check_good(M)
    status = 0 if rep.ok else 1
    if cfg.fmt == "dot":
        return status, M.to_dot()
    text = f"{M!r}\n" + rep.text()
    data = {"coding": [c.label() for c in M.coding], "branches": len(M.tops), "ok": rep.ok, "k": rep.k,
            "problems": {n: getattr(rep, n) for n in ("diagonal", "cond1", "cond2", "cond3")}}
    return status, _emit(cfg, data, text)


def _envelope(cfg):
    M = _dca(cfg, 6)
    idx = _ints(cfg.options["nodes"], "--nodes")
    if not idx or any(not 0 <= i < M.n_coding for i in idx) or len(set(idx)) != len(idx):
        raise UsageError(f"--nodes must be distinct indices in 0..{M.n_coding - 1}")
    E = canonical_envelope([M.coding[i] for i in sorted(idx)], M)
    problems = envelope_violations(E, M)
    status = 1 if problems else 0
    if cfg.fmt == "dot":
        return status, E.to_dot()
    text = E.report() + "".join(f"violation: {p}\n" for p in problems)
    data = {"nodes": sorted(t.label() for t in E.nodes), "added": [t.label() for t in E.added],
            "types": [[t.label(), list(k[1])] for k, t in E.type_table()], "violations": problems}
    return status, _emit(cfg, data, text)


def _pigeonhole(cfg):
    o = cfg.options
    M = _dca(cfg, 7)
    try:
        inst = find_instance(M, o["case"], o["k"])
    except ValueError as e:
        raise UsageError(str(e)) from None
    head = [f"{M!r}", f"case {'.'.join(inst.cases)}, k={inst.k}, extensions {inst.n_extensions}, "
            f"candidates {len(inst.candidates)}"]
    rows = []
    if o["sweep"]:
        colorings = range(1 << inst.n_extensions)
    else:
        c = o["coloring"]
        if c == "side":
            colorings = [side_coloring(inst)]
        elif c == "rightmost":
            colorings = [rightmost_coloring(inst)]
        elif c == "constant":
            colorings = [0]
        elif set(c) <= {"0", "1"} and len(c) == inst.n_extensions:
            colorings = [[int(x) for x in c]]
        else:
            raise UsageError(f"--coloring must be side, rightmost, constant or a 0/1 string of length {inst.n_extensions}")
    exhausted = 0
    for h in colorings:
        res = pigeonhole_search(inst, h, o["min_size"])
        bits = h if isinstance(h, list) else [(h >> i) & 1 for i in range(inst.n_extensions)]
        key = "".join(map(str, bits))
        if res.found:
            rows.append({"coloring": key, "verdict": "witness", "color": res.color,
                         "vertices": list(theta_inverse(res.witness, M)), "covered": list(res.covered)})
        else:
            exhausted += 1
            rows.append({"coloring": key, "verdict": "exhausted"})
    lines = head + ["coloring  verdict   color  vertices  extensions"]
    for r in rows:
        if r["verdict"] == "witness":
            lines.append(f"{r['coloring']}  witness   {r['color']}      "
                         f"{','.join(map(str, r['vertices']))}  {','.join(map(str, r['covered']))}")
        else:
            lines.append(f"{r['coloring']}  exhausted")
    lines.append(f"colorings {len(rows)}, exhausted {exhausted}")
    data = {"case": inst.cases, "k": inst.k, "extensions": inst.n_extensions, "rows": rows,
            "exhausted": exhausted}
    return (1 if exhausted else 0), _emit(cfg, data, "\n".join(lines))


def _read_family(path, M) -> list[Approximation]:
    colors = dict(zip(M.coding, M.colors))
    w = M.coding[0].w
    fam = []
    try:
        fh = open(path)
    except OSError as e:
        raise UsageError(f"cannot read family file: {e}") from None
    with fh:
        for n, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].split()
            if not line:
                continue
            try:
                nodes = [Node.from_label(x.rstrip("*"), w) for x in line]
            except ValueError as e:
                raise UsageError(f"family file line {n}: {e}") from None
            cod = frozenset((t, colors[t]) for t in nodes if t in colors)
            A = Approximation(frozenset(nodes), cod)
            fam.append(Approximation(A.nodes, A.coding, len(A)))
    if not fam:
        raise UsageError("family file lists no approximations")
    return fam


def _front_check(cfg):
    o = cfg.options
    M = _dca(cfg, 5)
    j = o["census_size"] or max(1, M.n_coding // 2)
    if not 1 <= j <= M.n_coding:
        raise UsageError(f"--census-size must be in 1..{M.n_coding}")
    census = sub_dca_census(M, j)
    if o["family"]:
        F = _read_family(o["family"], M)
    else:
        F = random_front(census, o["k"], o["seed"], o["refinements"])
    v = is_front(F, None, census)
    parts = partition_problems(F, None, census) if v.ok else []
    nw = is_nash_williams(F)
    lines = [f"{M!r}, census of {len(census)} sub-antichains with {j} coding nodes",
             f"family of {len(F)} approximations"]
    lines += ["member: " + " ".join(t.label() + ("*" if t in C.coding_map() else "") for t in sorted(C.nodes))
              for C in F]
    lines.append(f"nash-williams: {'yes' if nw else 'no'}")
    lines.append(f"verdict: {v.verdict}" + (f" ({v.detail})" if v.detail else ""))
    lines += [f"partition: {p}" for p in parts]
    data = {"verdict": v.verdict, "detail": v.detail, "nash_williams": nw, "partition": parts,
            "family": [sorted(t.label() for t in C.nodes) for C in F]}
    status = 0 if v.verdict == "front" and not parts else 1
    return status, _emit(cfg, data, "\n".join(lines))


def _theta(cfg):
    M = _dca(cfg, 6)
    lines = [f"{M!r}"]
    data = {}
    if cfg.options["vertices"] is not None:
        vs = _ints(cfg.options["vertices"], "--vertices")
        try:
            N = theta_map(vs, M)
        except ValueError as e:
            size = min(max(1, len(vs)), M.n_coding)
            good = list(dict.fromkeys(",".join(map(str, theta_inverse(P, M))) for P in sub_dca_census(M, size)))[:3]
            hint = f"; vertex sets that work: {' '.join(good)}" if good else ""
            raise UsageError(f"{e}{hint}") from None
        back = theta_inverse(N, M)
        lines.append(f"vertices {','.join(map(str, vs))} -> {N!r}")
        lines += [f"coding {c.label()}" for c in N.coding]
        lines += [f"branch {t.label()}" for t in N.tops]
        lines.append(f"round trip: {'ok' if list(back) == sorted(vs) else 'FAILED'}")
        data.update(coding=[c.label() for c in N.coding], branches=[t.label() for t in N.tops],
                    round_trip=list(back) == sorted(vs))
    problems = basic_set_correspondence(M)
    lines.append(f"basic-set correspondence: {'ok' if not problems else 'FAILED'}")
    lines += [f"  {p}" for p in problems]
    data["correspondence_problems"] = problems
    ok = not problems and data.get("round_trip", True)
    return (0 if ok else 1), _emit(cfg, data, "\n".join(lines))


HANDLERS = {
    "build-tree": _build_tree,
    "degree": _degree,
    "good-dca": _good_dca,
    "envelope": _envelope,
    "pigeonhole": _pigeonhole,
    "front-check": _front_check,
    "theta": _theta,
}


def run(cfg: RunConfig) -> tuple[int, str]:
    return HANDLERS[cfg.subcommand](cfg)


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    opts = {k: v for k, v in vars(ns).items() if k not in ("subcommand", "template", "mode", "depth", "fmt", "out")}
    depths = tuple(_ints(opts.pop("depths"), "--depths")) if opts.get("depths") else ()
    opts.pop("depths", None)
    return RunConfig(ns.subcommand, ns.template, ns.mode, ns.depth, depths, ns.fmt, opts)


def main(argv=None) -> int:
    ns = _parser().parse_args(argv)
    try:
        cfg = config_from_args(ns)
        status, out = run(cfg)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (StructureError, TemplateError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except InsufficientDepth as e:
        print(f"error: {e}; rerun with a larger --depth", file=sys.stderr)
        return 2
    if ns.out:
        with open(ns.out, "w") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)
    return status


if __name__ == "__main__":
    sys.exit(main())
