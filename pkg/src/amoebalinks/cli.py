"""Command-line interface.

Every subcommand prints a plain-text report on stdout; file outputs are
only written when asked for.  Exit status is 0 on success, 1 when a
computation fails or a consistency check does not hold, 2 on bad usage.
"""

from __future__ import annotations

import argparse
import io
import logging
import shlex
import sys
from contextlib import redirect_stdout
from pathlib import Path

import numpy as np

from . import coamoeba as co
from .links import (
    LinkMismatch,
    Regime,
    classify_link,
    corollary_pq_link,
    count_components_lee_yang,
    link_report,
    singularity_link,
    unit_fiber_link,
)
from .poly import (
    LatticeMatrix,
    LatticeSegment,
    PolynomialError,
    apply_matrix,
    format_polynomial,
    integer_length,
    newton_polygon,
    parse_polynomial,
)
from .render import Palette, raster_to_image, write_ppm, write_svg_link
from .tropical import TropicalPolynomial, check_duality, corner_locus, dual_subdivision

log = logging.getLogger(__name__)


class UsageError(Exception):
    pass


def _pair(text: str, kind=float) -> tuple:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected two comma-separated values, got {text!r}")
    try:
        return kind(parts[0]), kind(parts[1])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _matrix(text: str) -> LatticeMatrix:
    try:
        return LatticeMatrix.parse(text)
    except PolynomialError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _poly(args):
    if not args.poly:
        raise UsageError("--poly is required")
    try:
        return parse_polynomial(args.poly, tau=args.tau)
    except PolynomialError as exc:
        raise UsageError(f"cannot parse polynomial: {exc}") from exc


def _figure(args, draw, *items):
    if getattr(args, "figure", None):
        from . import plotting

        getattr(plotting, draw)(*items, args.figure)
        print(f"figure: {args.figure}")


# --------------------------------------------------------------------------
# Subcommands


def cmd_parse_info(args) -> int:
    p = _poly(args)
    np_ = newton_polygon(p)
    print(f"polynomial: {format_polynomial(p)}")
    print(f"terms: {len(p)}")
    print(f"support: {' '.join(f'({i},{j})' for i, j in p.support)}")
    print(f"newton_vertices: {' '.join(f'({i},{j})' for i, j in np_.vertices)}")
    print(f"dimension: {np_.dimension}")
    print(f"twice_area: {np_.twice_area}")
    for a, b in np_.edges():
        print(f"edge: ({a[0]},{a[1]})-({b[0]},{b[1]}) integer_length {integer_length(LatticeSegment(a, b))}")
    if args.matrix:
        print(f"transformed: {format_polynomial(apply_matrix(p, args.matrix))}")
    return 0


def _sampling_lines(cloud: co.PointCloud) -> None:
    for key in ("grid", "log_range", "fibers", "skipped", "refined"):
        print(f"{key}: {cloud.meta[key]}")
    print(f"points: {len(cloud)}")


def cmd_amoeba(args) -> int:
    p = _poly(args)
    cloud = co.sample_amoeba(p, *args.grid, args.log_range, seed=args.seed)
    print(f"polynomial: {format_polynomial(p)}")
    _sampling_lines(cloud)
    if len(cloud):
        lo, hi = cloud.points.min(axis=0), cloud.points.max(axis=0)
        print(f"log_w_range: {lo[1]:.6f},{hi[1]:.6f}")
    if args.cloud:
        cloud.dump(args.cloud)
    _figure(args, "plot_amoeba", cloud)
    return 0


def cmd_coamoeba(args) -> int:
    p = _poly(args)
    cloud = co.sample_coamoeba(p, *args.grid, args.log_range, seed=args.seed)
    r = co.rasterize(cloud, args.raster)
    print(f"polynomial: {format_polynomial(p)}")
    _sampling_lines(cloud)
    print(f"raster: {args.raster}")
    print(f"occupied_bins: {int(np.count_nonzero(r.counts))}")
    if args.report:
        print(f"twice_area: {newton_polygon(p).twice_area}")
        print(f"complement_components: {co.complement_components(r)}")
    if args.out:
        write_ppm(raster_to_image(r, Palette(args.palette)), args.out)
    if args.cloud:
        cloud.dump(args.cloud)
    _figure(args, "plot_raster", r)
    return 0


def cmd_contour(args) -> int:
    p = _poly(args)
    cloud = co.contour_sample(p, *args.grid, args.log_range, im_tol=args.im_tol, seed=args.seed)
    r = co.rasterize(cloud, args.raster)
    print(f"polynomial: {format_polynomial(p)}")
    _sampling_lines(cloud)
    print(f"im_tol: {args.im_tol:g}")
    print(f"occupied_bins: {int(np.count_nonzero(r.counts))}")
    if args.report and len(cloud):
        full = co.rasterize(co.sample_coamoeba(p, *args.grid, args.log_range, seed=args.seed), args.raster)
        d = co.directed_cell_distance(r.occupied(), full.occupied())
        print(f"max_distance_to_coamoeba: {d:g}")
    if args.out:
        write_ppm(raster_to_image(r, Palette(args.palette)), args.out)
    if args.cloud:
        cloud.dump(args.cloud)
    _figure(args, "plot_raster", r)
    return 0


def cmd_tropical(args) -> int:
    if not args.terms:
        raise UsageError("--terms is required")
    text = sys.stdin.read() if args.terms == "-" else Path(args.terms).read_text()
    try:
        tp = TropicalPolynomial.parse(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"cannot read tropical terms: {exc}") from exc
    sub = dual_subdivision(tp)
    curve = corner_locus(tp, sub)
    rep = check_duality(curve, sub, tp)
    print(f"terms: {len(tp.terms)}")
    print(f"cells: {len(sub.cells)}")
    print(f"vertices: {len(curve.vertices)}")
    kinds = [e.kind for e in curve.edges]
    print(f"edges: {len(curve.edges)} (segments {kinds.count('segment')}, rays {kinds.count('ray')}, "
          f"lines {kinds.count('line')})")
    print(f"balanced: {'yes' if rep.balanced else 'no'}")
    print(f"duality: {'PASS' if rep.passed else 'FAIL'}")
    for k in rep.failed_edges:
        print(f"failed_edge: {k}")
    if args.out:
        Path(args.out).write_text(curve.to_json() + "\n")
    else:
        print(curve.to_json())
    _figure(args, "plot_tropical", curve)
    return 0 if rep.passed else 1


def cmd_singularity_link(args) -> int:
    link = singularity_link(_poly(args), seed=args.seed)
    print(link_report(link), end="")
    if args.svg:
        write_svg_link(link, args.svg, args.size)
    _figure(args, "plot_link", link)
    return 0


def _unit_fiber(args):
    if args.matrix is not None and (args.p is not None or args.q is not None):
        raise UsageError("give either --matrix or --p/--q, not both")
    if args.tau is None:
        raise UsageError("--tau is required")
    if args.matrix is None:
        if args.p is None or args.q is None:
            raise UsageError("--matrix or both --p and --q are required")
        return LatticeMatrix.diag(args.p, args.q)
    return args.matrix


def cmd_unit_fiber(args) -> int:
    L = _unit_fiber(args)
    if args.matrix is None:
        link = corollary_pq_link(args.p, args.q, args.tau)
    else:
        link = unit_fiber_link(L, args.tau)
    regime = Regime.of(args.tau)
    formula = count_components_lee_yang(L, regime)
    print(f"matrix: {','.join(map(str, L.entries))}")
    print(f"tau: {args.tau:g} ({regime.value})")
    print(link_report(link), end="")
    status = 0
    if args.check_formula:
        match = formula == len(link)
        print(f"traced: {len(link)}, formula: {formula}, {'MATCH' if match else 'MISMATCH'}")
        status = 0 if match else 1
    if args.svg:
        write_svg_link(link, args.svg, args.size)
    _figure(args, "plot_link", link)
    return status


def cmd_classify(args) -> int:
    if args.poly:
        link = singularity_link(_poly(args), seed=args.seed)
    else:
        L = _unit_fiber(args)
        link = unit_fiber_link(L, args.tau)
    cls = classify_link(link)
    print(f"components: {cls.count}")
    print(f"homology: {' '.join(f'({m},{n})' for m, n in cls.homologies)}")
    print(f"label: {cls.label}")
    print(f"description: {cls.description}")
    return 0


def cmd_batch(args) -> int:
    status = 0
    lines = Path(args.jobs).read_text().splitlines()
    for k, line in enumerate(lines):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        print(f"## job {k + 1}: {line}")
        argv = shlex.split(line)
        if argv and argv[0] == "batch":
            print("error: nested batch jobs are not allowed")
            status = max(status, 2)
            continue
        status = max(status, run(argv))
    return status


# --------------------------------------------------------------------------
# Parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="amoebalinks", description="Amoebas, coamoebas, tropical curves and torus links.")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp, poly=True):
        if poly:
            sp.add_argument("--poly", help="Laurent polynomial in z, w (z1, z2 also accepted)")
            sp.add_argument("--tau", type=float, help="value substituted for the symbol tau")
        sp.add_argument("--seed", type=int, default=0, help="root-solver seed (default 0)")
        sp.add_argument("--figure", help="also save a matplotlib PNG figure here")

    def sampling(sp):
        sp.add_argument("--grid", type=lambda s: _pair(s, int), default=co.DEFAULT_GRID, metavar="R,A",
                        help="radii and angles of the sampling grid (default 400,1200)")
        sp.add_argument("--log-range", type=_pair, default=co.DEFAULT_LOG_RANGE, metavar="MIN,MAX",
                        help="range of log|z| (default -3,3)")
        sp.add_argument("--cloud", help="write the sampled points to this text file")

    def raster(sp):
        sp.add_argument("--raster", type=int, default=co.DEFAULT_RASTER, metavar="N", help="raster size (default 512)")
        sp.add_argument("--out", help="write the raster as a binary PPM")
        sp.add_argument("--palette", choices=[p.value for p in Palette], default="grayscale")
        sp.add_argument("--report", action="store_true", help="add raster analysis to the report")

    def link_opts(sp):
        sp.add_argument("--svg", help="write the link diagram as SVG")
        sp.add_argument("--size", type=int, default=400, help="SVG size in pixels (default 400)")

    def fiber_opts(sp):
        sp.add_argument("--matrix", type=_matrix, metavar="a,b,c,d", help="lattice matrix (a b; c d)")
        sp.add_argument("--p", type=int, help="use diag(p, q)")
        sp.add_argument("--q", type=int)

    sp = sub.add_parser("parse-info", help="canonical form and Newton polygon")
    common(sp)
    sp.add_argument("--matrix", type=_matrix, metavar="a,b,c,d", help="also print the exponent-transformed polynomial")
    sp.set_defaults(func=cmd_parse_info)

    sp = sub.add_parser("amoeba", help="sample the amoeba")
    common(sp)
    sampling(sp)
    sp.set_defaults(func=cmd_amoeba)

    sp = sub.add_parser("coamoeba", help="sample and rasterise the coamoeba")
    common(sp)
    sampling(sp)
    raster(sp)
    sp.set_defaults(func=cmd_coamoeba)

    sp = sub.add_parser("contour", help="points where the logarithmic Gauss map is real")
    common(sp)
    sampling(sp)
    raster(sp)
    sp.add_argument("--im-tol", type=float, default=1e-3, help="tolerance on |Im gamma| (default 1e-3)")
    sp.set_defaults(func=cmd_contour)

    sp = sub.add_parser("tropical", help="corner locus and dual subdivision")
    common(sp, poly=False)
    sp.add_argument("--terms", help="file of 'i j value' lines, or - for stdin")
    sp.add_argument("--out", help="write the curve as JSON here instead of stdout")
    sp.set_defaults(func=cmd_tropical)

    sp = sub.add_parser("singularity-link", help="link of a quasi-homogeneous singularity")
    common(sp)
    link_opts(sp)
    sp.set_defaults(func=cmd_singularity_link)

    sp = sub.add_parser("unit-fiber", help="trace the unit fiber of a transformed Lee-Yang polynomial")
    common(sp, poly=False)
    sp.add_argument("--tau", type=float, help="Lee-Yang parameter (positive, not 1)")
    fiber_opts(sp)
    link_opts(sp)
    sp.add_argument("--check-formula", action="store_true", help="compare with the gcd count; exit 1 on mismatch")
    sp.set_defaults(func=cmd_unit_fiber)

    sp = sub.add_parser("classify", help="torus type of a singularity link or unit fiber")
    common(sp)
    fiber_opts(sp)
    sp.set_defaults(func=cmd_classify)

    sp = sub.add_parser("batch", help="run one job per line of a file")
    sp.add_argument("--jobs", required=True, help="file with one argument line per job")
    sp.set_defaults(func=cmd_batch)
    return ap


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.verbose:
        logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (LinkMismatch, ValueError, ArithmeticError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def run_captured(argv) -> tuple[int, str]:
    """Run and return ``(status, stdout text)``; handy in scripts and tests."""
    buf = io.StringIO()
    with redirect_stdout(buf):
        code = run(argv)
    return code, buf.getvalue()


def main() -> None:
    sys.exit(run())
