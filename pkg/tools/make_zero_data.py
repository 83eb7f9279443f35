"""Regenerate the bundled zero tables in src/primevar/data/."""
import argparse
import pathlib
import time

from primevar.characters import character_group
from primevar.lfunctions import compute_table, write_zeros


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--qmax", type=int, default=20)
    ap.add_argument("--height", type=float, default=100.0)
    ap.add_argument("--tall-qmax", type=int, default=10,
                    help="moduli up to this get --tall-height")
    ap.add_argument("--tall-height", type=float, default=200.0)
    ap.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parents[1]
                                         / "src" / "primevar" / "data"))
    args = ap.parse_args()
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for q in range(1, args.qmax + 1):
        if not any(c.is_primitive for c in character_group(q)):
            continue
        T = args.tall_height if q <= args.tall_qmax else args.height
        t0 = time.time()
        tab = compute_table(q, T)
        write_zeros(tab, out / f"zeros_q{q:03d}.txt")
        print(f"q={q:3d} T={T:g} characters={len(tab.entries)} "
              f"zeros={sum(e.gammas.size for e in tab.entries.values())} "
              f"{time.time() - t0:.1f}s", flush=True)


if __name__ == "__main__":
    main()
