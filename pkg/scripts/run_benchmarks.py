#!/usr/bin/env python3
"""Run every built-in benchmark preset and summarize the results.

Writes one output directory per preset (profiles, field, summary) plus a
combined table on stdout.
"""

import argparse
import sys
from pathlib import Path

from fracfem import presets
from fracfem.cli import run


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="bench-results", help="output root")
    ap.add_argument("--only", nargs="*", default=None,
                    help="subset of preset names")
    args = ap.parse_args(argv)

    names = args.only or sorted(presets.PRESETS)
    root = Path(args.out)
    rows = []
    status = 0
    for name in names:
        config = presets.get(name)
        code, summary = run(config, root / name, preset_name=name)
        status = max(status, code)
        rows.append((name, code, summary))

    print()
    print(f"{'preset':<22} {'ok':>3} {'rel_L2':>10} {'max_pen':>11} "
          f"{'newton':>7} {'wall[s]':>8}")
    for name, code, s in rows:
        rel = "n/a" if s["rel_L2"] is None else f"{s['rel_L2']:.4f}"
        print(f"{name:<22} {'yes' if code == 0 else 'NO':>3} {rel:>10} "
              f"{s['max_penetration']:>11.2e} {s['newton_iters']:>7} "
              f"{s['wall_time_s']:>8.2f}")
    return status


if __name__ == "__main__":
    sys.exit(main())
