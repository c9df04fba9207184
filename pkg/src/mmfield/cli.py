"""Command-line surface.

One JSON document per invocation (stdout or --out); figures and CSV files are
written next to the JSON when --emit-svg / an output stem is given.  Exit
codes: 0 success, 1 usage, 2 validation failure, 3 budget exhausted (bounds
are still emitted).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import curvature as curv
from . import filtrations as filt
from . import transport
from .core import MMField, as_metric, hausdorff, validate_field
from .demo import two_circle_scenario, weighted_circle_scenario
from .gh import gh_distance
from .gwp import gp_distance, gw_solve
from .io import FieldFormatError, field_to_dict, load_field

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_BUDGET = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def _parse_p(raw: str) -> float:
    if raw.lower() in ("inf", "infinity", "oo"):
        return math.inf
    return float(raw)


def _parse_grid(spec: str) -> np.ndarray:
    try:
        start, stop, step = (float(tok) for tok in spec.split(":"))
    except ValueError as exc:
        raise FieldFormatError(f"bad grid spec {spec!r}; want start:stop:step") from exc
    if step <= 0:
        raise FieldFormatError("grid step must be positive")
    k = int(round((stop - start) / step))
    return start + step * np.arange(0, k + 1)


def _parse_indices(raw: str, field) -> np.ndarray:
    if raw == "support":
        if not isinstance(field, MMField):
            raise FieldFormatError("ref=support needs a weighted field")
        return field.support()
    if raw == "all":
        return np.arange(as_metric(field).n)
    return np.array([int(tok) for tok in raw.split(",")], dtype=int)


def _emit(doc: dict, out: str | None) -> None:
    text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _stem(args, default: str) -> Path:
    return Path(args.out).with_suffix("") if args.out else Path(default)


def _load(path, pseudo_ok=False):
    try:
        return load_field(path, pseudo_ok=pseudo_ok)
    except (OSError, FieldFormatError, ValueError) as exc:
        raise FieldFormatError(f"{path}: {exc}") from exc


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_validate(args) -> int:
    f = _load(args.field, pseudo_ok=args.pseudo_ok)
    report = validate_field(f, tol_metric=args.tol_metric, tol_mass=args.tol_mass)
    _emit({"command": "validate", "input": args.field, "report": report.to_dict()}, args.out)
    return EXIT_OK if report.ok else EXIT_VALIDATION


def _require_mm(f, path: str) -> MMField:
    if not isinstance(f, MMField):
        raise FieldFormatError(f"{path}: weighted field required (weights key missing)")
    return f


def cmd_dist(args) -> int:
    X = _load(args.x)
    Y = _load(args.y)
    doc = {"command": "dist", "kind": args.kind, "inputs": [args.x, args.y],
           "seed": args.seed}
    if args.kind == "gh":
        res = gh_distance(X, Y, budget=args.budget)
        doc["result"] = res.to_dict()
        status = res.status
    elif args.kind == "gp":
        res = gp_distance(_require_mm(X, args.x), _require_mm(Y, args.y),
                          budget=args.budget)
        doc["result"] = res.to_dict()
        status = res.status
    else:
        res = gw_solve(_require_mm(X, args.x), _require_mm(Y, args.y),
                       p=_parse_p(args.p), restarts=args.restarts,
                       budget=args.budget, seed=args.seed)
        doc["result"] = res.to_dict()
        status = res.status
    _emit(doc, args.out)
    return EXIT_BUDGET if status == "bounds_only" else EXIT_OK


def cmd_curvature(args) -> int:
    doc = {"command": f"curvature {args.sub}", "seed": args.seed}
    if args.sub == "sample":
        X = _require_mm(_load(args.x), args.x)
        D = curv.sample_adm(X, args.n, args.m, seed=args.seed)
        doc["result"] = {
            "provenance": D.provenance,
            "samples": [
                {"r": [[float(v) for v in row] for row in D.rs[k]],
                 "b": np.asarray(D.bs[k]).tolist()}
                for k in range(D.m)
            ],
        }
    elif args.sub == "dist":
        X = _require_mm(_load(args.x), args.x)
        Y = _require_mm(_load(args.y), args.y)
        seeds = curv.spawn_seeds(args.seed, 2)
        DX = curv.sample_adm(X, args.n, args.m, seed=seeds[0])
        DY = curv.sample_adm(Y, args.n, args.m, seed=seeds[1])
        value = curv.adm_wasserstein(DX, DY, p=_parse_p(args.p))
        doc["result"] = {"n": args.n, "m": args.m, "p": args.p,
                         "estimate": value, "status": "estimate"}
    elif args.sub == "converge":
        X = _require_mm(_load(args.x), args.x)
        Y = _require_mm(_load(args.y), args.y)
        n_list = [int(tok) for tok in args.n_list.split(",")]
        curve = curv.gw_convergence_experiment(
            X, Y, p=_parse_p(args.p), n_list=n_list, m=args.m,
            seed=args.seed, replicates=args.replicates)
        records = curve.to_records()
        doc["result"] = {"records": records, "reference_status": curve.reference_status}
        if args.out or args.emit_svg:
            from . import report
            stem = _stem(args, "convergence")
            report.write_csv(stem.with_suffix(".csv"), records)
            doc["csv"] = str(stem.with_suffix(".csv"))
            if args.emit_svg:
                report.render_convergence(stem.with_suffix(".svg"), curve)
                doc["svg"] = str(stem.with_suffix(".svg"))
    elif args.sub == "reconstruct":
        X = _require_mm(_load(args.x), args.x)
        Y = _require_mm(_load(args.y), args.y)
        rep = curv.reconstruction_test(X, Y, n=args.n, m=args.m, seed=args.seed,
                                       permutations=args.permutations)
        doc["result"] = rep.to_dict()
    else:  # uniformity
        X = _require_mm(_load(args.x), args.x)
        frac = curv.uniformity_mass(X, n=args.n, eps=args.eps, p=_parse_p(args.p),
                                    trials=args.trials, seed=args.seed)
        doc["result"] = {"n": args.n, "eps": args.eps, "p": args.p,
                         "trials": args.trials, "fraction": frac}
    _emit(doc, args.out)
    return EXIT_OK


def cmd_filtration(args) -> int:
    doc = {"command": f"filtration {args.kind}", "input": args.field}
    f = _load(args.field)
    base = as_metric(f)
    grids = [(_parse_grid(g)) for g in (args.grid or [])]
    if args.kind in ("nbhd2", "nbhd3"):
        want = 2 if args.kind == "nbhd2" else 3
        if len(grids) != want:
            raise FieldFormatError(f"{args.kind} needs {want} --grid specs (axis order r,s[,t])")
        if args.kind == "nbhd2":
            ref = _parse_indices(args.ref, f)
            mask = filt.nbhd_bifiltration(ref, f, grids[0], grids[1])
        else:
            mask = filt.nbhd_trifiltration(_require_mm(f, args.field),
                                           grids[0], grids[1], grids[2])
        doc["result"] = mask.to_dict()
        if args.emit_svg:
            from . import report
            stem = _stem(args, args.kind)
            coords = report.embed_2d(base.d)
            cell = tuple(len(g) - 1 for g in mask.grids)
            members = mask.members(*cell)
            report.render_mask_panels(
                stem.with_suffix(".svg"), coords,
                [(f"{args.kind} at top grade", members, np.ones(len(members)))])
            doc["svg"] = str(stem.with_suffix(".svg"))
    else:
        if args.kind == "vr2":
            cx = filt.vr_bifiltration(f, dim_cap=args.dim_cap, r_max=args.r_max,
                                      s_max=args.s_max)
        else:
            cx = filt.vr_trifiltration(_require_mm(f, args.field), dim_cap=args.dim_cap,
                                       r_max=args.r_max, s_max=args.s_max,
                                       t_max=args.t_max, subset_cap=args.subset_cap)
        doc["result"] = cx.to_dict()
        if args.emit_svg:
            from . import report
            stem = _stem(args, args.kind)
            coords = report.embed_2d(base.d)
            grade = (args.r_max, args.s_max if args.s_max is not None else math.inf)
            if args.kind == "vr3":
                grade = (args.r_max, args.s_max, args.t_max)
            report.render_complex_panels(
                stem.with_suffix(".svg"), coords,
                [(f"{args.kind} at top grade", cx.at(*grade))])
            doc["svg"] = str(stem.with_suffix(".svg"))
    _emit(doc, args.out)
    return EXIT_OK


def _sup_value_gap(F, G) -> float:
    bf, bg = as_metric(F), as_metric(G)
    return float(max(bf.space.dist(bf.values[i], bg.values[i]) for i in range(bf.n)))


def _same_domain(F, G, tol: float) -> None:
    bf, bg = as_metric(F), as_metric(G)
    if bf.n != bg.n or np.abs(bf.d - bg.d).max() > tol:
        raise FieldFormatError("stability inputs must share the ambient domain metric")


def cmd_stability(args) -> int:
    F = _load(args.x)
    G = _load(args.y)
    doc = {"command": f"stability {args.kind}", "inputs": [args.x, args.y]}
    if args.kind == "vr-identity":
        bf, bg = as_metric(F), as_metric(G)
        if bf.n != bg.n:
            raise FieldFormatError("vr-identity needs a shared vertex set")
        eps = max(0.5 * float(np.abs(bf.d - bg.d).max()), _sup_value_gap(F, G))
        cx = filt.vr_bifiltration(bf, dim_cap=args.dim_cap, r_max=args.r_max,
                                  s_max=None)
        worst = 0.0
        for s in cx.simplices:
            verts = list(s.cells)
            diam_g = float(bg.d[np.ix_(verts, verts)].max(initial=0.0)) if len(verts) > 1 else 0.0
            srad_g = 2.0 * filt.radius_in_B(bg.space, np.asarray(bg.values)[verts])
            worst = max(worst, diam_g - s.grade[0], srad_g - s.grade[1])
        bound = 2.0 * eps
        doc["result"] = {"measured_shift": worst, "theorem_bound": bound,
                         "epsilon": eps, "pass": bool(worst <= bound + 1e-9)}
    else:
        _same_domain(F, G, args.tol_metric)
        grids = [(_parse_grid(g)) for g in (args.grid or [])]
        value_gap = _sup_value_gap(F, G)
        if args.kind == "nbhd2":
            if len(grids) != 2:
                raise FieldFormatError("nbhd2 needs two --grid specs")
            refx = _parse_indices(args.ref_x, F)
            refy = _parse_indices(args.ref_y, G)
            m1 = filt.nbhd_bifiltration(refx, F, grids[0], grids[1])
            m2 = filt.nbhd_bifiltration(refy, G, grids[0], grids[1])
            geom = hausdorff(as_metric(F), refx, refy)
        else:
            if len(grids) != 3:
                raise FieldFormatError("nbhd3 needs three --grid specs")
            Fm = _require_mm(F, args.x)
            Gm = _require_mm(G, args.y)
            m1 = filt.nbhd_trifiltration(Fm, grids[0], grids[1], grids[2])
            m2 = filt.nbhd_trifiltration(Gm, grids[0], grids[1], grids[2])
            geom = transport.prokhorov(Fm.weights, Gm.weights, as_metric(F).d).value
        step = m1.common_step()
        measured = filt.inclusion_interleaving_shift(m1, m2)
        bound = geom + 2.0 * value_gap
        doc["result"] = {
            "measured_shift": measured if math.isfinite(measured) else None,
            "theorem_bound": bound,
            "grid_step": step,
            "pass": bool(math.isfinite(measured) and measured <= bound + step + 1e-9),
        }
    _emit(doc, args.out)
    return EXIT_OK if doc["result"]["pass"] else EXIT_VALIDATION


def cmd_demo(args) -> int:
    from . import report
    stem = _stem(args, args.figure)
    if args.figure == "fig1":
        sc = two_circle_scenario(seed=args.seed)
        r, s, t = sc.params["r"], sc.params["s"], sc.params["t"]
        amb = sc.ambient
        n_r = filt.nbhd_bifiltration(sc.ref, amb, [r], [np.inf])
        n_rs = filt.nbhd_bifiltration(sc.ref, amb, [r], [s])
        n_rst = filt.nbhd_trifiltration(amb, [r], [s], [t])
        a = set(n_r.members(0, 0).tolist())
        b = set(n_rs.members(0, 0).tolist())
        c = set(n_rst.members(0, 0, 0).tolist())
        mass = filt.ball_mass(amb, r, s)
        meta = {
            "params": sc.params,
            "counts": {"N_r": len(a), "N_rs": len(b), "N_rst": len(c)},
            "subset_rst_in_rs": c <= b,
            "subset_rs_in_r": b <= a,
            "strict_rst_in_rs": c < b,
            "strict_rs_in_r": b < a,
            "min_retained_ball_mass": float(min((mass[i] for i in c), default=0.0)),
            "mass_threshold": 1.0 - t,
        }
        if args.emit_svg:
            mx = float(mass.max()) or 1.0
            panels = [
                ("N^r", sorted(a), [1.0] * len(a)),
                ("N^{r,s}", sorted(b), [mass[i] / mx for i in sorted(b)]),
                ("N^{r,s,t}", sorted(c), [mass[i] / mx for i in sorted(c)]),
            ]
            report.render_mask_panels(stem.with_suffix(".svg"), sc.coords, panels,
                                      samples=sc.samples)
            meta["svg"] = str(stem.with_suffix(".svg"))
        ambient_path = stem.parent / (stem.name + "_ambient.json")
        ambient_path.write_text(
            json.dumps(field_to_dict(amb), sort_keys=True) + "\n", encoding="utf-8")
        meta["ambient_json"] = str(ambient_path)
        doc = {"command": "demo fig1", "seed": args.seed, "result": meta}
        ok = meta["subset_rst_in_rs"] and meta["subset_rs_in_r"]
    else:
        sc = weighted_circle_scenario(seed=args.seed)
        r, s, t = sc.params["r"], sc.params["s"], sc.params["t"]
        X = sc.field
        vr_plain = filt.vr_bifiltration(X.base, dim_cap=2, r_max=r, s_max=None)
        vr_rs = filt.vr_bifiltration(X.base, dim_cap=2, r_max=r, s_max=s)
        vr_rst = filt.vr_trifiltration(X, dim_cap=2, r_max=r, s_max=s, t_max=t)
        plain_cells = set(vr_plain.at(r, math.inf))
        rs_cells = set(vr_rs.at(r, s))
        meta = {
            "params": sc.params,
            "counts": {"VR_r": len(plain_cells), "VR_rs": len(rs_cells),
                       "VR_rst": len(vr_rst.simplices)},
            "subset_rs_in_r": rs_cells <= plain_cells,
            "strict_rs_in_r": rs_cells < plain_cells,
            "truncated": vr_rst.truncated,
        }
        if args.emit_svg:
            panels = [
                ("VR^r", sorted(plain_cells)),
                ("VR^{r,s}", sorted(rs_cells)),
                ("VR^{r,s,t}", [sx.cells for sx in vr_rst.simplices]),
            ]
            report.render_complex_panels(stem.with_suffix(".svg"), sc.coords, panels,
                                         sizes=X.weights)
            meta["svg"] = str(stem.with_suffix(".svg"))
        field_path = stem.parent / (stem.name + "_field.json")
        field_path.write_text(
            json.dumps(field_to_dict(X), sort_keys=True) + "\n", encoding="utf-8")
        meta["field_json"] = str(field_path)
        doc = {"command": "demo fig2", "seed": args.seed, "result": meta}
        ok = meta["subset_rs_in_r"]
    _emit(doc, args.out)
    return EXIT_OK if ok else EXIT_VALIDATION


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _add_common(sp, budget_default: int = 500_000):
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--tol-metric", type=float, default=1e-9)
    sp.add_argument("--tol-mass", type=float, default=1e-9)
    sp.add_argument("--budget", type=int, default=budget_default)
    sp.add_argument("--out", default=None)
    sp.add_argument("--emit-svg", action="store_true")


def build_parser() -> _Parser:
    ap = _Parser(prog="mmfield", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("validate")
    sp.add_argument("field")
    sp.add_argument("--pseudo-ok", action="store_true")
    _add_common(sp)
    sp.set_defaults(fn=cmd_validate)

    sp = sub.add_parser("dist")
    sp.add_argument("kind", choices=["gh", "gp", "gw"])
    sp.add_argument("x")
    sp.add_argument("y")
    sp.add_argument("--p", default="2")
    sp.add_argument("--restarts", type=int, default=16)
    _add_common(sp, budget_default=5_000)
    sp.set_defaults(fn=cmd_dist)

    sp = sub.add_parser("curvature")
    sp.add_argument("sub", choices=["sample", "dist", "converge", "reconstruct", "uniformity"])
    sp.add_argument("x")
    sp.add_argument("y", nargs="?")
    sp.add_argument("--n", type=int, default=3)
    sp.add_argument("--m", type=int, default=200)
    sp.add_argument("--p", default="1")
    sp.add_argument("--n-list", default="2,4,8")
    sp.add_argument("--replicates", type=int, default=8)
    sp.add_argument("--permutations", type=int, default=200)
    sp.add_argument("--eps", type=float, default=0.2)
    sp.add_argument("--trials", type=int, default=200)
    _add_common(sp)
    sp.set_defaults(fn=cmd_curvature)

    sp = sub.add_parser("filtration")
    sp.add_argument("kind", choices=["nbhd2", "nbhd3", "vr2", "vr3"])
    sp.add_argument("field")
    sp.add_argument("--grid", action="append",
                    help="start:stop:step, repeat per axis in order r,s[,t]")
    sp.add_argument("--ref", default="support")
    sp.add_argument("--dim-cap", type=int, default=2)
    sp.add_argument("--r-max", type=float, default=1.0)
    sp.add_argument("--s-max", type=float, default=None)
    sp.add_argument("--t-max", type=float, default=1.0)
    sp.add_argument("--subset-cap", type=int, default=filt.SUBSET_CAP)
    _add_common(sp)
    sp.set_defaults(fn=cmd_filtration)

    sp = sub.add_parser("stability")
    sp.add_argument("kind", choices=["nbhd2", "nbhd3", "vr-identity"])
    sp.add_argument("x")
    sp.add_argument("y")
    sp.add_argument("--grid", action="append")
    sp.add_argument("--ref-x", default="support")
    sp.add_argument("--ref-y", default="support")
    sp.add_argument("--dim-cap", type=int, default=2)
    sp.add_argument("--r-max", type=float, default=1.0)
    _add_common(sp)
    sp.set_defaults(fn=cmd_stability)

    sp = sub.add_parser("demo")
    sp.add_argument("figure", choices=["fig1", "fig2"])
    _add_common(sp)
    sp.set_defaults(fn=cmd_demo)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.fn(args)
    except FieldFormatError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_VALIDATION
    except (ValueError, transport.InfeasibleTransportError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_VALIDATION


if __name__ == "__main__":
    raise SystemExit(main())
