"""Command-line front end.

Subcommands: verify-triple, integrate-frame, ribaucour, pair-check,
cflat-check, gallery (list | eval), export.  Exit codes: 0 success with all
residuals under the configured thresholds, 2 threshold violation (reports are
still written), 1 usage or configuration error.
"""

from __future__ import annotations

import argparse
import math
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import gallery as gal
from .ambient import SpaceFormSpec
from .errors import SpaceformLabError
from .frames import integrate_frame, path_independence_residual, standard_frame_state
from .io import (
    export_csv,
    export_obj,
    load_config,
    max_threads,
    write_report,
)
from .report import ResidualReport
from .ribaucour import (
    RibaucourState,
    integrate_ribaucour,
    invariant_drift,
    seed_state,
    transform_immersion,
    transformed_triple,
)
from .triples import TripleField, classify, first_integrals, triple_residuals
from .verify import (
    ImmersionSample,
    holonomic_data,
    hj_relation_residual,
    isometry_check,
    pair_gauss_relation,
    schouten_codazzi_residual,
)

_GALLERY_ITEMS = {
    "problemstar_e1_Cneg": "trivial seed v=(1,0,0), V=sqrt(-C)(0,1,0), delta=(1,-1,1)",
    "problemstar_e1_Cpos": "trivial seed v=(1,0,0), V=sqrt(C)(0,0,1), delta=(1,-1,1)",
    "problemstar_em1_Cpos": "trivial seed v=(0,1,0), V=sqrt(C)(0,0,1), delta=(1,-1,1)",
    "problemstar_em1_Cneg": "trivial seed v=(0,0,1), V=sqrt(-C)(1,0,0), delta=(-1,-1,-1)",
    "cflat": "trivial seed v=(0,1,1), V=(1,0,0), delta=(1,-1,1) (c=0)",
    "r4_pair": "printed flat-target transformed hypersurface (theta parameter)",
    "s4_pair": "printed sphere-target transformed hypersurface (reference up to signs)",
    "cflat_K_minus1": "printed conformally flat hypersurface, K=-1 branch",
}


def _fail(msg) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return 1


def _seed_triple(cfg):
    amb = cfg.ambient
    if "gallery" in cfg.seed:
        name = cfg.seed["gallery"]
        return gal.trivial_seed(name, cfg.grid, c=amb.get("c", 0.0),
                                s=amb.get("s", 0), C=cfg.seed.get("C")), name
    spec = SpaceFormSpec(amb.get("c", 0.0), amb.get("s", 0))
    t = cfg.seed["triple"]
    return TripleField.constant(cfg.grid, tuple(t["delta"]), spec,
                                v=t["v"], V=t["V"]), None


def _family(cfg):
    fam_cfg = (cfg.ribaucour or {}).get("family")
    if fam_cfg is None:
        return None
    kw = {k: fam_cfg[k] for k in ("K", "a", "rho", "theta") if k in fam_cfg}
    if "phases" in fam_cfg:
        kw["phases"] = tuple(fam_cfg["phases"])
    amb = cfg.ambient
    return gal.PhiFamily(fam_cfg["kind"], c=amb.get("c", 0.0),
                         eps=1 - 2 * amb.get("s", 0), **kw)


def _frame_init(cfg, seed_name, spec):
    if seed_name is not None:
        return gal.seed_frame_state(seed_name, spec)
    return standard_frame_state(spec)


def _finish(report_dict, cfg, ok) -> int:
    path = cfg.outputs.get("report")
    if path:
        write_report(report_dict, path)
    for line in _render(report_dict):
        print(line)
    return 0 if ok else 2


def _render(d, indent=0):
    for k, v in d.items():
        if isinstance(v, dict):
            yield "  " * indent + f"{k}:"
            yield from _render(v, indent + 1)
        else:
            yield "  " * indent + f"{k}: {v}"


def _cmd_verify_triple(cfg) -> int:
    triple, _ = _seed_triple(cfg)
    rep = triple_residuals(triple)
    K = first_integrals(triple, cfg.grid.base)
    out = {"residuals": rep.as_dict(), "first_integrals": list(K.as_tuple())}
    try:
        cls = classify(triple, cfg.tolerances["report"])
        out["classification"] = {"kind": cls.kind, "eps_hat": cls.eps_hat, "C": cls.C}
    except SpaceformLabError as exc:
        out["classification"] = {"error": str(exc)}
    return _finish(out, cfg, rep.ok(cfg.tolerances["report"]))


def _cmd_integrate_frame(cfg) -> int:
    triple, name = _seed_triple(cfg)
    init = _frame_init(cfg, name, triple.spec)
    ff = integrate_frame(triple, init, cfg.grid, max_step=cfg.max_step,
                         integrability_tol=cfg.tolerances["integrability"])
    from .frames import frame_gram_residual, induced_metric

    gram = frame_gram_residual(ff)
    path = path_independence_residual(triple, init, cfg.grid, cfg.max_step)
    _, metric_rep = induced_metric(ff)
    if cfg.outputs.get("csv"):
        export_csv(ff.f, cfg.grid, cfg.outputs["csv"])
    out = {"gram": gram.as_dict(), "path_independence": path.as_dict(),
           "induced_metric": metric_rep.as_dict()}
    ok = gram.ok(cfg.tolerances["report"]) and path.ok(cfg.tolerances["report"])
    return _finish(out, cfg, ok)


def _run_ribaucour_pipeline(cfg, fam=None):
    fam = fam or _family(cfg)
    if fam is not None:
        triple = fam.seed_triple(cfg.grid)
        init = gal.phi_state(fam, cfg.grid.base_point)
        k2 = fam.K2target
        frame_init = fam.frame_init()
    else:
        triple, name = _seed_triple(cfg)
        raw = cfg.ribaucour["state"]
        k2 = cfg.ribaucour.get("k2_target")
        if k2 is None:
            # target from the classification, never guessed
            cls = classify(triple, cfg.tolerances["report"])
            if cls.is_problem_star:
                k2 = float(cls.eps_hat)
            elif cls.is_conformally_flat:
                k2 = 0.0
            else:
                raise SpaceformLabError(
                    "seed classifies as Neither; set ribaucour.k2_target explicitly"
                )
        request = RibaucourState(tuple(raw["gamma"]), tuple(raw["vprime"]),
                                 raw["phi"], raw.get("psi", 0.0), raw["beta"])
        init = seed_state(triple, cfg.grid.base, request, k2)
        frame_init = _frame_init(cfg, name, triple.spec)
    rf = integrate_ribaucour(triple, init, cfg.grid, max_step=cfg.max_step,
                             mask_tol=cfg.tolerances["mask"], K2target=k2)
    ff = integrate_frame(triple, frame_init, cfg.grid, max_step=cfg.max_step,
                         integrability_tol=cfg.tolerances["integrability"])
    fprime = transform_immersion(ff, rf)
    return triple, rf, ff, fprime


def _cmd_ribaucour(cfg) -> int:
    if not cfg.ribaucour:
        return _fail("ribaucour section missing from config")
    triple, rf, ff, fprime = _run_ribaucour_pipeline(cfg)
    drift = invariant_drift(rf)
    tt = transformed_triple(triple, rf)
    out = {
        "invariant_drift": {"K1": drift.K1, "K2": drift.K2, "Omega": drift.Omega},
        "masked_nodes": int(0 if rf.masked is None else rf.masked.sum()),
    }
    try:
        cls = classify(tt, cfg.tolerances["report"])
        out["transformed_classification"] = {"kind": cls.kind, "eps_hat": cls.eps_hat,
                                             "C": cls.C}
    except SpaceformLabError as exc:
        out["transformed_classification"] = {"error": str(exc)}
    if cfg.outputs.get("csv"):
        export_csv(fprime.positions, cfg.grid, cfg.outputs["csv"], rf.masked)
    if cfg.outputs.get("obj"):
        export_obj(fprime.positions, cfg.grid, 2, cfg.grid.base_point[2],
                   (0, 1, 2), cfg.outputs["obj"], rf.masked)
    ok = drift.overall <= cfg.tolerances["report"]
    return _finish(out, cfg, ok)


def _cmd_pair_check(cfg) -> int:
    fam = _family(cfg)
    if fam is None or fam.kind != "problemstar":
        return _fail("pair-check needs a 'problemstar' family in the config")
    if not (fam.K == 1.0 and fam.a == 1.0 and fam.c == 0.0 and fam.eps == 1):
        return _fail("the matched sphere partner is built for K=a=1, c=0, eps=1")
    fam_s = gal.PhiFamily("problemstar_sphere", K=-2.0, c=1.0, eps=1,
                          rho=fam.rho, theta=fam.theta, phases=fam.phases)
    workers = max_threads(2)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        fut_r = pool.submit(_run_ribaucour_pipeline, cfg, fam)
        fut_s = pool.submit(_run_ribaucour_pipeline, cfg, fam_s)
        _, _, _, fr = fut_r.result()
        _, _, _, fs = fut_s.result()
    iso = isometry_check(fr, fs)
    _, _, _, lam_r = holonomic_data(fr)
    _, _, _, lam_s = holonomic_data(fs)
    pair = pair_gauss_relation(lam_r, lam_s, fam.c, fam_s.c, fam.eps, fam_s.eps)
    match = gal.signed_component_match(
        fs.positions, gal.explicit_fprime("s4_pair", fam.theta, cfg.grid.points()))
    out = {
        "isometry": iso.as_dict(),
        "pair_gauss": pair.report.as_dict(),
        "printed_s4_component_match": match,
        "sphere_constraint_max": fs.on_form_residual(),
    }
    ok = (iso.overall_max <= cfg.tolerances["report"]
          and pair.report.overall_max <= 10 * cfg.tolerances["report"])
    return _finish(out, cfg, ok)


def _cmd_cflat_check(cfg) -> int:
    fam = _family(cfg)
    if fam is None or fam.kind != "cflat":
        return _fail("cflat-check needs a 'cflat' family in the config")
    triple, rf, ff, fprime = _run_ribaucour_pipeline(cfg, fam)
    tt = transformed_triple(triple, rf)
    hj = hj_relation_residual(tt)
    sc = schouten_codazzi_residual(tt)
    out = {"hj_relation": hj, "schouten_codazzi": sc.as_dict()}
    try:
        cls = classify(tt, cfg.tolerances["report"])
        out["classification"] = {"kind": cls.kind}
    except SpaceformLabError as exc:
        out["classification"] = {"error": str(exc)}
    if cfg.outputs.get("csv"):
        export_csv(fprime.positions, cfg.grid, cfg.outputs["csv"], rf.masked)
    ok = hj <= cfg.tolerances["report"]
    return _finish(out, cfg, ok)


def _cmd_export(cfg) -> int:
    if cfg.ribaucour:
        _, rf, _, fprime = _run_ribaucour_pipeline(cfg)
        values, masked = fprime.positions, rf.masked
    else:
        triple, name = _seed_triple(cfg)
        init = _frame_init(cfg, name, triple.spec)
        ff = integrate_frame(triple, init, cfg.grid, max_step=cfg.max_step,
                             integrability_tol=cfg.tolerances["integrability"])
        values, masked = ff.f, None
    wrote = []
    if cfg.outputs.get("csv"):
        export_csv(values, cfg.grid, cfg.outputs["csv"], masked)
        wrote.append(cfg.outputs["csv"])
    if cfg.outputs.get("obj"):
        export_obj(values, cfg.grid, 2, cfg.grid.base_point[2], (0, 1, 2),
                   cfg.outputs["obj"], masked)
        wrote.append(cfg.outputs["obj"])
    if not wrote:
        return _fail("export needs outputs.csv or outputs.obj in the config")
    for p in wrote:
        print(f"wrote {p}")
    return 0


def _cmd_gallery(args) -> int:
    if args.action == "list":
        width = max(len(k) for k in _GALLERY_ITEMS)
        for name, desc in _GALLERY_ITEMS.items():
            print(f"{name:<{width}}  {desc}")
        return 0
    name = args.name
    if name is None:
        return _fail("gallery eval needs --name")
    if name in gal.EXPLICIT_NAMES:
        at = [float(x) for x in args.at.split(",")]
        if len(at) != 3:
            return _fail("--at needs three comma-separated coordinates")
        vec = gal.explicit_fprime(name, args.theta, np.array(at))
        print("(" + ", ".join(repr(float(x) + 0.0) for x in vec) + ")")
        return 0
    if name in gal.SEED_KINDS:
        from .grid import ParameterGrid

        grid = ParameterGrid.centered(1.0, (5, 5, 5))
        C = args.C
        if C is None:
            C = {"problemstar_e1_Cneg": -1.0, "problemstar_e1_Cpos": 1.0,
                 "problemstar_em1_Cpos": 1.0, "problemstar_em1_Cneg": -1.0,
                 "cflat": None}[name]
        t = gal.trivial_seed(name, grid, c=args.c, s=args.s, C=C)
        v, h, V = t.at(grid.base)
        print(f"v = {tuple(v)}  V = {tuple(V)}  delta = {t.delta}")
        return 0
    return _fail(f"unknown gallery item {name!r}; try 'gallery list'")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spaceform-lab",
        description="Numerical laboratory for holonomic hypersurfaces of space forms",
    )
    sub = parser.add_subparsers(dest="command")
    for name in ("verify-triple", "integrate-frame", "ribaucour", "pair-check",
                 "cflat-check", "export"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
    pg = sub.add_parser("gallery")
    pg.add_argument("action", choices=["list", "eval"])
    pg.add_argument("--name")
    pg.add_argument("--at", default="0,0,0")
    pg.add_argument("--theta", type=float, default=math.pi / 4)
    pg.add_argument("--c", type=float, default=0.0)
    pg.add_argument("--s", type=int, default=0)
    pg.add_argument("--C", type=float, default=None)
    return parser


_COMMANDS = {
    "verify-triple": _cmd_verify_triple,
    "integrate-frame": _cmd_integrate_frame,
    "ribaucour": _cmd_ribaucour,
    "pair-check": _cmd_pair_check,
    "cflat-check": _cmd_cflat_check,
    "export": _cmd_export,
}


def run(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    if args.command is None:
        parser.print_usage()
        return 1
    try:
        if args.command == "gallery":
            return _cmd_gallery(args)
        cfg = load_config(args.config)
        return _COMMANDS[args.command](cfg)
    except SpaceformLabError as exc:
        return _fail(str(exc))


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
