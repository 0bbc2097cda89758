"""Empirical state frequencies of edge switching and global Curveball on a
small degree sequence whose realisations can be enumerated."""

import argparse
from collections import Counter

import numpy as np
from scipy import stats

from graphforge.gen_degree import edge_switch, global_curveball, havel_hakimi
from graphforge.rand import RngStream


def _key(g):
    e = np.sort(g.edges, axis=1)
    return tuple(sorted(map(tuple, e.tolist())))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--degrees", default="2,2,1,1")
    ap.add_argument("--steps", type=int, default=100)
    ap.add_argument("--chains", type=int, default=10_000)
    a = ap.parse_args()

    D = [int(x) for x in a.degrees.split(",")]
    start = havel_hakimi(D)
    for name, fn in (("edge switch", edge_switch), ("global curveball", global_curveball)):
        c = Counter(_key(fn(start, a.steps, RngStream(s))) for s in range(a.chains))
        counts = np.array(list(c.values()))
        p = stats.chisquare(counts).pvalue if len(counts) > 1 else 1.0
        print(f"{name}: {len(c)} states, counts {sorted(counts.tolist())}, chi2 p={p:.3f}")


if __name__ == "__main__":
    main()
