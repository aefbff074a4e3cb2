#!/usr/bin/env python3
"""Mode-mix sweep: normalized SIF ratio of the pressurized inclined crack
under increasing remote compression.

The fracture carries a fixed internal pressure while the remote compression
sweeps from zero upward; the crack transitions from pure opening (ratio 1)
to friction-dominated sliding (ratio 0).  Results go to a CSV.
"""

import argparse
import csv
import sys

from fracfem import presets
from fracfem.config import build_mesh
from fracfem.oracles import sif_components, sif_ratio
from fracfem.solver import run_load_steps


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--pressure", type=float, default=10e6)
    ap.add_argument("--ratios", type=float, nargs="*",
                    default=[0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0])
    ap.add_argument("--out", default="sif_sweep.csv")
    args = ap.parse_args(argv)

    rows = []
    for r in args.ratios:
        config = presets.inclined_crack(sigma=r * args.pressure,
                                        pressure=args.pressure)
        mesh = build_mesh(config)
        state = run_load_steps(mesh, config.material, config.friction,
                               config.bcs, config.solver)[-1]
        if not state.converged:
            print(f"ratio {r}: did not converge ({state.message})",
                  file=sys.stderr)
            return 1
        k1, k2 = sif_components(mesh, state, 0, "end", config.material)
        ratio = sif_ratio(mesh, state, 0, "end", config.material)
        rows.append((r, k1, k2, ratio))
        print(f"|sigma/p| = {r:5.2f}:  K_I = {k1:10.4g}  K_II = {k2:10.4g}  "
              f"(2/pi) atan(K_I/K_II) = {ratio:.4f}")

    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["load_ratio", "K_I", "K_II", "sif_ratio"])
        writer.writerows(rows)
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
