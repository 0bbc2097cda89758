"""Stream a large G(n, m) chunk by chunk and time it."""

import argparse
import time

from graphforge import parallel
from graphforge.gen_basic import GnmParams, gnm_job
from graphforge.rand import RngStream


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=10 ** 7)
    ap.add_argument("--m", type=int, default=10 ** 8)
    ap.add_argument("--seed", type=int, default=11)
    ap.add_argument("--threads", type=int, default=None)
    a = ap.parse_args()

    threads = parallel.resolve_threads(a.threads)
    job = gnm_job(GnmParams(a.n, a.m), RngStream(a.seed))
    t0 = time.perf_counter()
    total = chunks = 0
    for e in job.iter_chunks(threads=threads):
        total += len(e)
        chunks += 1
    elapsed = time.perf_counter() - t0
    print(f"{total} edges in {chunks} chunks, {elapsed:.2f}s, "
          f"{total / elapsed / 1e6:.1f} M edges/s, threads={threads}")


if __name__ == "__main__":
    main()
