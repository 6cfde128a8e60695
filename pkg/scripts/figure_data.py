"""CSV data for plots: level curves with a rotated copy, polar radii, sections.

    python scripts/figure_data.py --outdir results
"""

import argparse
import csv
import math
from pathlib import Path

import numpy as np

from maxtail import gauss_geometry as gg
from maxtail import parse_spec
from maxtail.cli import fmt
from maxtail.maxdep import log_section_values


def write(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(v) for v in r])


def level_curves(alphas, beta, reach=4.0, n=400):
    for a in alphas:
        w, z = gg._Curve(a).point(np.linspace(-1.0, 1.0, 2 * n + 1))
        wr, zr = gg.rotate(w, z, beta)
        for row in zip(w, z, wr, zr):
            if max(abs(v) for v in row) <= reach:
                yield (a, *row)


def sections(specs, us, n=400):
    for text in specs:
        spec = parse_spec(text)
        for u in us:
            x = np.geomspace(u * u, 1.0, n)
            lv = log_section_values(spec, u, x)
            for xi, li in zip(x, lv):
                yield (text, u, xi / u, li - 2.0 * math.log(u))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--outdir", type=Path, default=Path("results"))
    args = ap.parse_args()
    args.outdir.mkdir(parents=True, exist_ok=True)

    write(args.outdir / "level_curves.csv", ["alpha", "w", "z", "w_rot", "z_rot"],
          level_curves((0.1, 0.25, 0.4, 0.6), math.pi / 6))
    polar = []
    for a in (0.1, 0.25, 0.6, 0.8):
        th, r = gg.radius_profile(a, 400)
        polar.extend((a, t, v) for t, v in zip(th, r))
    write(args.outdir / "polar_radius.csv", ["alpha", "theta", "r"], polar)
    specs = ["gaussian:rho=0.5", "gaussian:rho=-0.5", "mo:a=0.3,b=0.6", "evcmix:s=0.3,psi1=0.9,psi2=0.2"]
    write(args.outdir / "sections.csv", ["spec", "u", "x_over_u", "log_C_minus_2log_u"],
          sections(specs, (1e-2, 1e-4)))
    probes = [r for a in gg.DEFAULT_ALPHAS for b in gg.DEFAULT_BETAS
              for r in gg.probe_rows(gg.intersection_probe(a, b))]
    write(args.outdir / "probes.csv", list(gg.PROBE_COLUMNS), probes)
    print(f"wrote figure data to {args.outdir}")


if __name__ == "__main__":
    main()
