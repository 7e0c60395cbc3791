"""plotkit command line: one figure type per invocation.

    plotkit lag  --in lagdensity.csv --out lag.png
    plotkit qq   --in qq.csv [--series step|angle] --out qq.png
    plotkit acf  --in acf.csv --out acf.png
    plotkit map  --in locations.csv --in states.csv --out map.png
    plotkit bias --in study_a.json --in study_b.json ... --out bias.png
"""

from __future__ import annotations

import argparse
import sys

from . import __version__, render
from .schemas import PlotkitError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="plotkit", description="Render carhmm output files")
    parser.add_argument("--version", action="version", version=f"plotkit {__version__}")
    sub = parser.add_subparsers(dest="figure", required=True)

    def add(name, help_text, n_inputs="+"):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--in", dest="inputs", action="append", required=True,
                       help="input file (repeatable where the figure takes several)")
        p.add_argument("--out", required=True, help="output image path")
        return p

    add("lag", "lag-density heat map with the y = x line")
    q = add("qq", "residual QQ plot")
    q.add_argument("--series", choices=["step", "angle"], default="step")
    add("acf", "residual autocorrelation")
    add("map", "track map coloured by decoded state (locations.csv, states.csv)")
    add("bias", "median bias vs track length from study JSONs")
    return parser


def _expect_inputs(ns, n: int) -> None:
    if len(ns.inputs) != n:
        raise PlotkitError(f"{ns.figure} takes exactly {n} --in file(s), got {len(ns.inputs)}")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if ns.figure == "lag":
            _expect_inputs(ns, 1)
            render.render_lag(ns.inputs[0], ns.out)
        elif ns.figure == "qq":
            _expect_inputs(ns, 1)
            render.render_qq(ns.inputs[0], ns.out, series=ns.series)
        elif ns.figure == "acf":
            _expect_inputs(ns, 1)
            render.render_acf(ns.inputs[0], ns.out)
        elif ns.figure == "map":
            _expect_inputs(ns, 2)
            render.render_map(ns.inputs[0], ns.inputs[1], ns.out)
        elif ns.figure == "bias":
            render.render_bias(ns.inputs, ns.out)
    except PlotkitError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {ns.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
