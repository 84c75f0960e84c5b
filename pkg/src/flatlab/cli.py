"""Command-line entry point: ``flatlab <subcommand> ...``.

Data goes to stdout as ``kind key=value ...`` lines (or tab-separated with
``--format tsv``); diagnostics go to stderr. Exit status is 0 on success,
1 when an input is unreadable or invalid, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import delaunay as dl
from . import extremal as ex
from . import flow
from . import qc
from . import ray_geometry as rg
from . import rayspace as rs
from .numberfield import QuadExt, as_quad, parse_literal
from .surface import SurfaceParseError, apply_linear, load_surface, render_surface, total_area, validate
from .topology import dm_poset
from .trajectories import multicurve_type

__all__ = ["main", "Emitter", "load_family"]


class UsageError(Exception):
    pass


class Emitter:
    """Prints records as ``kind k=v`` lines or TSV blocks.

    Field names starting with an underscore print bare in table mode.
    """

    def __init__(self, fmt: str, out=None):
        self.fmt = fmt
        self.out = out or sys.stdout
        self._header = None

    def record(self, kind: str, **fields) -> None:
        if self.fmt == "tsv":
            keys = ("kind",) + tuple(k.lstrip("_") for k in fields)
            if keys != self._header:
                print("\t".join(keys), file=self.out)
                self._header = keys
            print("\t".join([kind] + [_text(v) for v in fields.values()]), file=self.out)
        else:
            words = [kind] + [_text(v) if k.startswith("_") else f"{k}={_text(v)}" for k, v in fields.items()]
            print(" ".join(words), file=self.out)

    def line(self, text: str) -> None:
        if self.fmt == "tsv":
            self._header = None
        print(text, file=self.out)


def _text(v) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, QuadExt):
        return v.render()
    if v is None:
        return "inf"
    return str(v)


def _surface(path):
    surface = load_surface(path)
    report = validate(surface)
    if not report.valid:
        raise SurfaceParseError(report.summary(), None, str(path))
    return surface


def _lambdas(text: str | None, default=None) -> list:
    if text is None:
        return list(default or [])
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if tok:
            try:
                out.append(flow.parse_lambda(tok))
            except (ValueError, ZeroDivisionError):
                raise UsageError(f"bad lambda value {tok!r}") from None
    return out


def _bound(args):
    if args.bound is None:
        return None
    value = parse_literal(args.bound)
    if value.sign() <= 0:
        raise UsageError("--bound must be positive")
    return value


def load_family(path) -> list:
    """One curve per line; two curves on a line pair a class on X with one on Y."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise SurfaceParseError(f"cannot read file: {exc.strerror}", None, str(path)) from None
    family = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            curves = [ex.parse_curve(tok) for tok in line.split()]
        except ValueError as exc:
            raise SurfaceParseError(str(exc), lineno, str(path)) from None
        if len(curves) == 1:
            family.append(curves[0])
        elif len(curves) == 2:
            family.append(tuple(curves))
        else:
            raise SurfaceParseError("expected one curve or a pair per line", lineno, str(path))
    if not family:
        raise SurfaceParseError("curve family is empty", None, str(path))
    return family


# -- subcommands -------------------------------------------------------------------------------


def cmd_validate(args, em: Emitter) -> int:
    surface = load_surface(args.surface)
    report = validate(surface)
    if not report.valid:
        for problem in report.problems:
            print(f"{args.surface}: {problem}", file=sys.stderr)
        return 1
    cones = ",".join(f"{c.angle}pi" for c in report.cone_points) or "none"
    em.record("valid", genus=report.genus, area=report.area, cone_angles=cones, marked=len(report.marked))
    return 0


def cmd_area(args, em: Emitter) -> int:
    em.record("area", value=total_area(_surface(args.surface)))
    return 0


def cmd_flow(args, em: Emitter) -> int:
    lams = _lambdas(args.lam)
    if len(lams) != 1:
        raise UsageError("flow needs exactly one --lambda")
    em.line(render_surface(flow.ray_point(_surface(args.surface), lams[0])).rstrip("\n"))
    return 0


def _emit_cylinders(analysis, em: Emitter) -> None:
    for cyl in analysis.cylinders:
        em.record("cyl", _id=cyl.index, a=cyl.circumference, b=cyl.height, M=cyl.modulus, core=cyl.word_text())
    if em.fmt == "tsv":
        em.record("status", status=analysis.status_text())
    else:
        em.line(f"status={analysis.status_text()}")


def cmd_cylinders(args, em: Emitter) -> int:
    ray = flow.make_ray(_surface(args.surface), _bound(args))
    lams = _lambdas(args.lam)
    analysis = flow.analysis_at(ray, lams[0]) if lams else ray.analysis
    _emit_cylinders(analysis, em)
    if ray.status == "Strebel":
        em.record("type", value=multicurve_type(analysis, ray.base).describe().replace(" ", ";"))
    return 0


def cmd_ray(args, em: Emitter) -> int:
    ray = flow.make_ray(_surface(args.surface), _bound(args))
    lams = _lambdas(args.lam)
    if args.action == "classify":
        em.line(flow.classify(ray).render())
    elif args.action == "moduli":
        for lam in lams or [1]:
            for i, m in enumerate(flow.cylinder_moduli_at(ray, lam)):
                em.record("modulus", lam=as_quad(lam), cyl=i, M=m)
    else:
        if not lams:
            raise UsageError("witness needs --lambda")
        # fixed three-column table, whatever --format says
        for row in flow.adm_deficiency_witness(ray, lams):
            em.line(f"{_text(row.lam)}\t{row.lower_bound!r}\t{row.log_lambda!r}")
    return 0


def cmd_delaunay(args, em: Emitter) -> int:
    surface = _surface(args.surface)
    if args.canonical:
        em.line(dl.canonical_form(surface).text)
        return 0
    lams = _lambdas(args.lam)
    if lams:
        ray = flow.make_ray(surface, _bound(args))
        for row in dl.verify_delaunay_along_ray(ray, lams):
            em.record(
                "critical",
                lam=row.lam,
                edges=row.critical_edges,
                missing=len(row.missing),
                max_radius=row.max_circumradius,
                ok=str(row.ok).lower(),
            )
        return 0
    result = dl.delaunay_flip(surface)
    tri = result.triangulation
    potential = result.potentials[-1] if result.potentials else dl.flip_potential(tri)
    em.record("delaunay", triangles=len(tri), flips=result.flips, tie_flips=result.tie_flips, potential=potential)
    em.record("code", value=dl.canonical_form(surface).text)
    return 0


def _family(args, default=None):
    if args.family:
        return load_family(args.family)
    if args.curve:
        return [ex.parse_curve(c) for c in args.curve]
    if default is not None:
        return default
    raise UsageError("give --family <file> or --curve")


def cmd_extlen(args, em: Emitter) -> int:
    surface = _surface(args.surface)
    family = _family(args)
    lams = _lambdas(args.lam) or [flow.parse_lambda(1)]
    bound = _bound(args)
    for lam in lams:
        point = flow.ray_point(surface, lam)
        for curve in family:
            if isinstance(curve, tuple):
                raise UsageError("extlen takes single curves, not pairs")
            b = ex.ext_bounds(curve, point, bound)
            em.record("ext", lam=lam, curve=curve, lower=b.lower, upper=b.upper, lower_from=b.lower_source)
    return 0


def cmd_dist(args, em: Emitter) -> int:
    x = _surface(args.surface)
    if args.other:
        y = _surface(args.other)
    else:
        lams = _lambdas(args.lam)
        if len(lams) != 1:
            raise UsageError("dist needs --other <surface> or one --lambda")
        y = flow.ray_point(x, lams[0])
    family = _family(args)
    kb = ex.kerckhoff_lower_bound(x, y, family, _bound(args))
    em.record("dist", lower_bound=kb.value, ratio=kb.ratio, curve=_curve_text(kb.curve))
    return 0


def _curve_text(item) -> str:
    if item is None:
        return "none"
    if isinstance(item, tuple):
        return f"{item[0]}|{item[1]}"
    return str(item)


def cmd_qc(args, em: Emitter) -> int:
    if args.mode == "triangle":
        rng = np.random.default_rng(args.seed)
        ks, eps, rad, bound = qc.triangle_sweep(args.triangles, rng)
        worst = int(np.argmax(ks * eps / rad))
        em.record(
            "triangles",
            count=args.triangles,
            constant=qc.triangle_bound_constant(),
            max_ratio=float((ks * eps / rad)[worst]),
            within=str(bool(np.all(ks <= bound))).lower(),
        )
        return 0
    eps = float(Fraction(args.eps))
    if eps:
        f = lambda x: x + eps / (2 * np.pi) * np.sin(2 * np.pi * x)  # noqa: E731
        fp = lambda x: 1 + eps * np.cos(2 * np.pi * x)  # noqa: E731
    else:
        f = fp = None
    rep = qc.close_map_dilatation(
        float(as_quad(parse_literal(args.r1))),
        float(as_quad(parse_literal(args.r2))),
        args.n,
        float(Fraction(args.alpha)),
        f,
        fp,
        grid=(args.grid, args.grid),
    )
    em.record(
        "qc",
        sup_K=rep.max_dilatation,
        target=rep.target,
        d0=rep.d0,
        excess=rep.excess,
        theta=rep.argmax[0],
        h=rep.argmax[1],
        kernels="numba" if qc._kernels.USING_NUMBA else "numpy",
    )
    return 0


def cmd_endpoint(args, em: Emitter) -> int:
    ray = flow.make_ray(_surface(args.surface), _bound(args))
    lams = _lambdas(args.lam)
    e = rg.endpoint(ray, lams[0] if lams else None)
    for line in e.render():
        em.line(line)
    return 0


def cmd_phi(args, em: Emitter) -> int:
    ray = flow.make_ray(_surface(args.surface), _bound(args))
    lams = _lambdas(args.lam)
    em.line(rg.phi(ray, lams[0] if lams else None).render())
    return 0


def cmd_phi_inv(args, em: Emitter) -> int:
    ray = flow.make_ray(_surface(args.surface), _bound(args))
    e = rg.endpoint(ray)
    try:
        moduli = [parse_literal(tok, ray.base.d) for tok in args.moduli.split(":")]
    except ValueError as exc:
        raise UsageError(f"bad --moduli: {exc}") from None
    twists = None
    if args.twist:
        twists = [parse_literal(tok, ray.base.d) for tok in args.twist.split(":")]
    glued = rg.phi_inverse(e, moduli, twists, _bound(args))
    em.line(render_surface(glued.base).rstrip("\n"))
    return 0


def cmd_tits(args, em: Emitter) -> int:
    r1 = flow.make_ray(_surface(args.surface), _bound(args))
    r2 = flow.make_ray(_surface(args.other), _bound(args))
    try:
        angle = rg.tits_angle(r1, r2)
    except rg.Inconclusive as exc:
        em.record("tits", angle="Inconclusive", mode="moduli", reason=str(exc).replace(" ", "_"))
        return 0
    em.record("tits", angle=angle.value, mode=angle.mode)
    return 0


def cmd_pretits(args, em: Emitter) -> int:
    r1 = flow.make_ray(_surface(args.surface), _bound(args))
    r2 = flow.make_ray(_surface(args.other), _bound(args)) if args.other else r1
    grid = _lambdas(args.grid, [2, 4, 8, 16])
    default = [ex.DirectionalCore(i) for i in range(len(r1.analysis.cylinders))] if r2 is r1 else None
    family = _family(args, default)
    for row in rg.pre_tits_estimate(r1, r2, grid, family):
        em.record("pretits", lam=row.lam, log_lambda=row.log_lambda, bound=row.bound, ratio=row.ratio)
    return 0


def _demo_space(args):
    if args.demo == "quadrant":
        return rs.ProductSpace((rs.HalfLine(), rs.HalfLine()))
    if args.demo == "halfline":
        return rs.ProductSpace((rs.HalfLine(),))
    if args.demo == "tree":
        if not args.file:
            raise UsageError("--demo tree needs a product file")
        path = Path(args.file)
        try:
            text = path.read_text()
        except OSError as exc:
            raise SurfaceParseError(f"cannot read file: {exc.strerror}", None, str(path)) from None
        try:
            return rs.parse_product(text, str(path))
        except ValueError as exc:
            raise SurfaceParseError(str(exc)) from None  # message already carries file:line
    raise UsageError(f"unknown demo {args.demo!r}")


def cmd_rayspace(args, em: Emitter) -> int:
    space = _demo_space(args)
    built = rs.build_iterated(space, args.depth)
    for line in built.render():
        em.line(line)
    counts = built.counts()
    em.line("summary " + " ".join(f"level{k}={counts[k]}" for k in sorted(counts)))
    try:
        cx = rs.boundary_complex(space)
    except ValueError:
        cx = None
    if cx is not None:
        for line in cx.render():
            em.line(line)
    return 0


def cmd_dmposet(args, em: Emitter) -> int:
    try:
        poset = dm_poset(args.genus, args.punctures)
    except LookupError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    for line in poset.render():
        em.line(line)
    return 0


# -- parser ------------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="flatlab", description="Flat surfaces, Strebel rays and their asymptotics.")
    p.add_argument("--format", choices=("table", "tsv"), default="table")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, surface=True, help=None):
        sp = sub.add_parser(name, help=help)
        if surface:
            sp.add_argument("surface")
        sp.add_argument("--format", choices=("table", "tsv"), default=argparse.SUPPRESS)
        sp.set_defaults(func=func)
        return sp

    def lam(sp):
        sp.add_argument("--lambda", dest="lam", help="flow parameter(s) p/q, comma separated")

    def bound(sp):
        sp.add_argument("--bound", help="length bound L for tracing vertical leaves")

    def family(sp):
        sp.add_argument("--family", help="curve family file")
        sp.add_argument("--curve", action="append", help="a curve: p/q, core:i, hcore:i or loop:k+,...")

    add("validate", cmd_validate, help="check a surface file")
    add("area", cmd_area, help="total area")
    sp = add("flow", cmd_flow, help="apply diag(lambda, 1/lambda)")
    lam(sp)
    sp = add("cylinders", cmd_cylinders, help="vertical cylinder decomposition")
    lam(sp)
    bound(sp)
    sp = add("ray", cmd_ray, help="classify the vertical ray")
    sp.add_argument("action", nargs="?", choices=("classify", "moduli", "witness"), default="classify")
    lam(sp)
    bound(sp)
    sp = add("delaunay", cmd_delaunay, help="Delaunay flips and canonical code")
    sp.add_argument("--canonical", action="store_true", help="print only the canonical code")
    lam(sp)
    bound(sp)
    sp = add("extlen", cmd_extlen, help="extremal length bounds")
    lam(sp)
    bound(sp)
    family(sp)
    sp = add("dist", cmd_dist, help="Kerckhoff lower bound on the distance")
    sp.add_argument("--other")
    lam(sp)
    bound(sp)
    family(sp)
    sp = add("qc", cmd_qc, surface=False, help="dilatation of explicit maps")
    sp.add_argument("mode", choices=("triangle", "close"))
    sp.add_argument("--r1", default="100")
    sp.add_argument("--r2", default="400")
    sp.add_argument("--n", type=int, default=0)
    sp.add_argument("--alpha", default="0")
    sp.add_argument("--eps", default="0")
    sp.add_argument("--grid", type=int, default=256)
    sp.add_argument("--triangles", type=int, default=1000)
    sp.add_argument("--seed", type=int, default=0)
    sp = add("endpoint", cmd_endpoint, help="endpoint data of the vertical ray")
    lam(sp)
    bound(sp)
    sp = add("phi", cmd_phi, help="simplex-bundle coordinates")
    lam(sp)
    bound(sp)
    sp = add("phi-inv", cmd_phi_inv, help="reglue the endpoint with given moduli")
    sp.add_argument("--moduli", required=True, help="p1:p2:...")
    sp.add_argument("--twist", help="t1:t2:...")
    bound(sp)
    sp = add("tits", cmd_tits, help="Tits angle against another surface")
    sp.add_argument("--other", required=True)
    bound(sp)
    sp = add("pretits", cmd_pretits, help="pre-Tits ratios along a grid")
    sp.add_argument("--other")
    sp.add_argument("--grid", help="lambda values, comma separated")
    bound(sp)
    family(sp)
    sp = add("rayspace", cmd_rayspace, surface=False, help="iterated ray space of a toy product")
    sp.add_argument("--demo", choices=("quadrant", "halfline", "tree"), required=True)
    sp.add_argument("file", nargs="?")
    sp.add_argument("--depth", type=int, default=2)
    sp = add("dmposet", cmd_dmposet, surface=False, help="multicurve-type poset")
    sp.add_argument("--genus", type=int, required=True)
    sp.add_argument("--punctures", type=int, default=0)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    em = Emitter(args.format)
    try:
        if getattr(args, "depth", 0) < 0:
            raise UsageError("--depth must be nonnegative")
        return args.func(args, em)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except SurfaceParseError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except (ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
