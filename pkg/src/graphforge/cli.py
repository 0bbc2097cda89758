"""``graphforge`` command line: gen, randomize, stats, verify.

Exit codes: 0 success, 1 usage or parse error, 2 infeasible parameters,
3 budget exceeded.
"""

from __future__ import annotations

import argparse
import secrets
import sys
from itertools import combinations
from typing import Optional

import numpy as np
from scipy import stats as sps

from . import gen_basic, gen_block, gen_degree, gen_spatial, transform
from .core import AdjacencyGraph, Graph, graph_stats
from .errors import BudgetExceededError, GraphForgeError, exit_code
from .io import read_graph, read_numbers, write_graph, write_labels, write_points
from .parallel import resolve_threads
from .rand import MASK64, RngStream
from .sampling import sample_k_of_n


class UsageError(GraphForgeError):
    exit_code = 1


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _floats(s: str) -> list:
    return [float(x) for x in s.replace(";", ",").split(",") if x.strip()]


def _int_map(s: str, kind=int) -> dict:
    out = {}
    for part in s.split(","):
        if part.strip():
            k, v = part.split(":")
            out[int(k)] = kind(v)
    return out


# --- model registry ---------------------------------------------------------------

def _variant_args(p):
    p.add_argument("--variant", default="undirected", choices=gen_basic.VARIANTS)
    p.add_argument("--n1", type=int)
    p.add_argument("--n2", type=int)


def _run_gnp(a, r, threads):
    n = a.n if a.variant != "bipartite" else (a.n1 or 0) + (a.n2 or 0)
    return gen_basic.gnp(gen_basic.GnpParams(n, a.p, a.variant, a.n1, a.n2), r, threads=threads), {}


def _run_gnm(a, r, threads):
    n = a.n if a.variant != "bipartite" else (a.n1 or 0) + (a.n2 or 0)
    return gen_basic.gnm(gen_basic.GnmParams(n, a.m, a.variant, a.n1, a.n2), r, threads=threads), {}


def _run_ba(a, r, threads):
    p = gen_basic.BaParams(a.n, a.d, a.n0, simple=a.simple)
    if a.method == "hash":
        return gen_basic.ba_hash(p, r, threads=threads), {}
    return gen_basic.ba_sequential(p, r), {}


def _run_copy(a, r, threads):
    return gen_basic.node_copy(gen_basic.CopyParams(a.n, a.d, a.p, seed_n=a.n0, simple=a.simple), r), {}


def _run_threshold(a, r, threads):
    return gen_basic.threshold_graph(a.n, a.p, r, threads=threads), {}


def _run_wrg(a, r, threads):
    return gen_basic.wrg(a.n, a.p, r, threads=threads), {}


def _run_rgg(a, r, threads):
    wax = tuple(a.waxman) if a.waxman else None
    g, pts = gen_spatial.rgg(gen_spatial.RggParams(a.n, a.r, a.dim, a.torus, wax), r, threads=threads)
    return g, {"points": pts}


def _run_rhg(a, r, threads):
    g, pts = gen_spatial.rhg_threshold(gen_spatial.RhgParams(a.n, a.alpha, a.R), r, threads=threads)
    return g, {"points": pts}


def _power_weights(n: int, gamma: float, avg: float) -> np.ndarray:
    i = np.arange(1, n + 1, dtype=np.float64)
    w = i ** (-1.0 / (gamma - 1.0))
    w *= avg * n / w.sum()
    # Cap heavy weights at sqrt(W) so the default sequence is realisable.
    for _ in range(100):
        cap = np.sqrt(w.sum())
        if w[0] <= cap:
            break
        w = np.minimum(w, cap * (1.0 - 1e-9))
    return w


def _run_chung_lu(a, r, threads):
    if a.weights:
        w = np.asarray(read_numbers(a.weights, float))
    elif a.n is not None:
        w = _power_weights(a.n, a.gamma, a.avg)
    else:
        raise UsageError("chung-lu needs --weights FILE or --n")
    mode = "clamp" if a.clamp else "strict"
    return gen_degree.chung_lu(w, r, threads=threads, mode=mode), {}


def _degrees_arg(a):
    if not a.degrees:
        raise UsageError("a degree file is required (--degrees FILE)")
    return read_numbers(a.degrees)


def _run_cm(a, r, threads):
    D = _degrees_arg(a)
    if a.mode == "erased":
        return gen_degree.erased_cm(D, r), {}
    if a.mode == "reject":
        return gen_degree.cm_simple_rejection(D, r, a.max_tries), {}
    return gen_degree.configuration_model(D, r), {}


def _run_cm_directed(a, r, threads):
    return gen_degree.cm_directed(read_numbers(a.in_degrees), read_numbers(a.out_degrees), r), {}


def _run_fdsm(a, r, threads):
    return gen_degree.fdsm(_degrees_arg(a), r, a.swaps_per_edge), {}


def _run_regular(a, r, threads):
    return gen_degree.random_regular(a.n, a.d, r, a.max_tries), {}


def _run_sbm(a, r, threads):
    probs = _floats(a.probs)
    flat = _floats(a.P)
    k = len(probs)
    if len(flat) != k * k:
        raise UsageError("--P needs k*k comma-separated entries (row-major)")
    P = tuple(tuple(flat[i * k:(i + 1) * k]) for i in range(k))
    g, labels = gen_block.sbm(gen_block.SbmParams(a.n, tuple(probs), P), r, threads=threads)
    return g, {"labels": labels}


def _run_rmat(a, r, threads):
    w = _floats(a.abcd)
    if len(w) != 4:
        raise UsageError("--abcd needs four comma-separated weights")
    p = gen_block.RmatParams(a.scale, a.m, *w, noise=a.noise, dedup=a.dedup or a.simple,
                             undirected=a.undirected, drop_loops=a.simple,
                             block_levels=a.block_levels)
    return gen_block.rmat(p, r, threads=threads), {}


def _run_bter(a, r, threads):
    p = gen_block.BterParams(_int_map(a.degree_counts), _int_map(a.cc, float), a.beta)
    return gen_block.bter(p, r), {}


def _add_models(sub):
    m = {}

    def model(name, fn, help_):
        p = sub.add_parser(name, help=help_)
        p.set_defaults(run=fn)
        m[name] = p
        return p

    p = model("gnp", _run_gnp, "G(n, p) and directed/bipartite variants")
    p.add_argument("--n", type=int)
    p.add_argument("--p", type=float, required=True)
    _variant_args(p)
    p = model("gnm", _run_gnm, "G(n, m) and directed/bipartite variants")
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int, required=True)
    _variant_args(p)
    p = model("ba", _run_ba, "preferential attachment")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--n0", type=int, default=0)
    p.add_argument("--simple", action="store_true")
    p.add_argument("--method", choices=("seq", "hash"), default="seq")
    p = model("copy", _run_copy, "node-copy model")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--n0", type=int, default=None)
    p.add_argument("--simple", action="store_true")
    p = model("threshold", _run_threshold, "random threshold graph")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=float, required=True, help="dominating probability")
    p = model("wrg", _run_wrg, "weighted random graph (geometric multiplicities)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=float, required=True, help="geometric parameter p'")
    p = model("rgg", _run_rgg, "random geometric graph")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--torus", action="store_true")
    p.add_argument("--waxman", type=float, nargs=2, metavar=("ALPHA", "BETA"))
    p = model("rhg", _run_rhg, "threshold random hyperbolic graph")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--R", type=float, required=True)
    p = model("chung-lu", _run_chung_lu, "Chung-Lu with given or power-law weights")
    p.add_argument("--weights")
    p.add_argument("--n", type=int)
    p.add_argument("--gamma", type=float, default=2.5)
    p.add_argument("--avg", type=float, default=10.0)
    p.add_argument("--clamp", action="store_true")
    p = model("cm", _run_cm, "configuration model")
    p.add_argument("--degrees")
    p.add_argument("--mode", choices=("plain", "erased", "reject"), default="plain")
    p.add_argument("--max-tries", type=int, default=1000)
    p = model("cm-directed", _run_cm_directed, "directed configuration model")
    p.add_argument("--in-degrees", required=True)
    p.add_argument("--out-degrees", required=True)
    p = model("fdsm", _run_fdsm, "Havel-Hakimi plus edge switching")
    p.add_argument("--degrees")
    p.add_argument("--swaps-per-edge", type=float, default=10.0)
    p = model("regular", _run_regular, "random regular graph")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--max-tries", type=int, default=1000)
    p = model("sbm", _run_sbm, "stochastic block model")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--probs", required=True, help="community probabilities, comma separated")
    p.add_argument("--P", required=True, help="k*k block matrix, row-major, comma separated")
    p = model("rmat", _run_rmat, "R-MAT")
    p.add_argument("--scale", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--abcd", default="0.57,0.19,0.19,0.05")
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--dedup", action="store_true")
    p.add_argument("--undirected", action="store_true")
    p.add_argument("--simple", action="store_true")
    p.add_argument("--block-levels", type=int, default=0)
    p = model("bter", _run_bter, "BTER")
    p.add_argument("--degree-counts", required=True, help="e.g. 4:5000,9:5000")
    p.add_argument("--cc", required=True, help="e.g. 4:0.5,9:0.3")
    p.add_argument("--beta", type=float, default=1.0)
    for p in m.values():
        _common(p)
        p.add_argument("--connect", choices=("reject", "giant", "tree"))
        p.add_argument("--connect-tries", type=int, default=100)
    return m


def _common(p):
    p.add_argument("--seed", default="0", help="64-bit seed or 'random'")
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--format", choices=("text", "bin"), default="text")
    p.add_argument("--out", default="-")


def _seed(a, err) -> int:
    if a.seed == "random":
        s = secrets.randbits(64)
        print(f"seed={s}", file=err)
        return s
    try:
        s = int(a.seed, 0)
    except ValueError:
        raise UsageError(f"bad seed {a.seed!r}") from None
    if not 0 <= s <= MASK64:
        raise UsageError("seed must fit in 64 bits")
    return s


def _emit(g: Graph, a, out, extras: Optional[dict] = None) -> None:
    if a.out == "-":
        write_graph(g, out, a.format)
        return
    write_graph(g, a.out, a.format)
    extras = extras or {}
    if "labels" in extras:
        write_labels(a.out + ".labels", extras["labels"])
    if "points" in extras:
        write_points(a.out + ".points", extras["points"])


def cmd_gen(a, out, err) -> int:
    r = RngStream(_seed(a, err))
    threads = resolve_threads(a.threads)
    if a.connect == "reject":
        g, tries = transform.rejection_connected(lambda s: a.run(a, s, threads)[0], a.connect_tries, r)
        print(f"tries={tries}", file=err)
        extras = {}
    else:
        g, extras = a.run(a, r, threads)
        if a.connect == "giant":
            g, _ = transform.extract_giant(g)
            extras = {}
        elif a.connect == "tree":
            g = transform.spanning_tree_augment(g, r.child("connect-tree"))
    _emit(g, a, out, extras)
    return 0


def cmd_randomize(a, out, err) -> int:
    g = read_graph(a.input)
    if g.directed:
        raise GraphForgeError("randomize needs an undirected graph")
    if not g.is_simple():
        raise GraphForgeError("randomize needs a simple graph")
    r = RngStream(_seed(a, err))
    adj = AdjacencyGraph.from_graph(g)
    if a.method == "es":
        res = gen_degree.edge_switch(adj, a.amount, r, dk2_restricted=a.dk2)
    elif a.method == "gcb":
        res = gen_degree.global_curveball(adj, a.amount, r)
    else:
        res = gen_degree.curveball(adj, a.amount, r)
    _emit(res.to_graph(), a, out)
    return 0


def cmd_stats(a, out, err) -> int:
    g = read_graph(a.input)
    r = RngStream(_seed(a, err))
    st = graph_stats(g, distance=a.distance, sample_size=a.samples, rng=r)
    d = st.as_dict()
    if a.machine:
        for k, v in d.items():
            out.write(f"{k}={'' if v is None else v}\n".encode())
    else:
        width = max(len(k) for k in d)
        for k, v in d.items():
            val = "n/a" if v is None else (f"{v:.6g}" if isinstance(v, float) else str(v))
            out.write(f"{k:<{width}}  {val}\n".encode())
    return 0


def _canon(edges) -> np.ndarray:
    e = np.sort(edges, axis=1)
    return e[np.lexsort((e[:, 1], e[:, 0]))] if len(e) else e


def _chi2_pass(counts, alpha=0.001) -> tuple:
    counts = np.asarray(counts, dtype=np.float64)
    p = sps.chisquare(counts).pvalue
    return p >= alpha, p


def cmd_verify(a, out, err) -> int:
    r = RngStream(_seed(a, err))
    n = getattr(a, "n", None)
    if n is not None and n > a.budget:
        raise BudgetExceededError(f"n={n} exceeds the oracle budget {a.budget}")
    lines = []
    ok_all = True
    if a.target == "rgg":
        for s in range(a.runs):
            for torus in (False, True):
                g, pts = gen_spatial.rgg(gen_spatial.RggParams(n, a.r, a.dim, torus), r.child("run", s))
                ok = np.array_equal(_canon(g.edges), gen_spatial.rgg_oracle(pts.coords, a.r, torus))
                ok_all &= ok
        lines.append(f"rgg n={n} runs={a.runs} oracle-equal={'pass' if ok_all else 'FAIL'}")
    elif a.target == "rhg":
        for s in range(a.runs):
            g, pts = gen_spatial.rhg_threshold(gen_spatial.RhgParams(n, a.alpha, a.R), r.child("run", s))
            ok = np.array_equal(_canon(g.edges), gen_spatial.rhg_oracle(pts.coords[:, 0], pts.coords[:, 1], a.R))
            ok_all &= ok
        lines.append(f"rhg n={n} runs={a.runs} oracle-equal={'pass' if ok_all else 'FAIL'}")
    else:
        N, k = a.N, a.k
        subsets = {c: i for i, c in enumerate(combinations(range(N), k))}
        if len(subsets) > a.budget:
            raise BudgetExceededError("too many subsets to enumerate")
        counts = np.zeros(len(subsets))
        draws = a.draws
        for t in range(draws):
            s = tuple(sorted(sample_k_of_n(k, (0, N), r.child("draw", t)).tolist()))
            counts[subsets[s]] += 1
        ok_all, pv = _chi2_pass(counts)
        lines.append(f"sample-k N={N} k={k} draws={draws} chi2 p={pv:.4g} {'pass' if ok_all else 'FAIL'}")
    for ln in lines:
        out.write((ln + "\n").encode())
    return 0 if ok_all else 1


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="graphforge", description="Scalable random graph generation")
    sub = ap.add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    gen = sub.add_parser("gen", help="generate a graph")
    gen.set_defaults(func=cmd_gen)
    models = gen.add_subparsers(dest="model", required=True, parser_class=_Parser)
    _add_models(models)

    rz = sub.add_parser("randomize", help="degree-preserving randomisation")
    rz.set_defaults(func=cmd_randomize)
    rz.add_argument("input")
    rz.add_argument("--method", choices=("es", "curveball", "gcb"), default="es")
    rz.add_argument("--amount", type=int, default=0,
                    help="switches (es), trades (curveball) or rounds (gcb)")
    rz.add_argument("--dk2", action="store_true", help="keep the joint degree matrix (es only)")
    _common(rz)

    st = sub.add_parser("stats", help="graph statistics")
    st.set_defaults(func=cmd_stats)
    st.add_argument("input")
    st.add_argument("--distance", action="store_true")
    st.add_argument("--samples", type=int)
    st.add_argument("--machine", action="store_true", help="key=value output")
    st.add_argument("--seed", default="0")

    vf = sub.add_parser("verify", help="oracle checks on small instances")
    vf.set_defaults(func=cmd_verify)
    targets = vf.add_subparsers(dest="target", required=True, parser_class=_Parser)
    for name in ("rgg", "rhg", "sample-k"):
        t = targets.add_parser(name)
        t.add_argument("--seed", default="0")
        t.add_argument("--budget", type=int, default=2000)
        t.add_argument("--runs", type=int, default=5)
        if name == "rgg":
            t.add_argument("--n", type=int, default=200)
            t.add_argument("--r", type=float, default=0.1)
            t.add_argument("--dim", type=int, default=2)
        elif name == "rhg":
            t.add_argument("--n", type=int, default=500)
            t.add_argument("--alpha", type=float, default=0.75)
            t.add_argument("--R", type=float, default=8.0)
        else:
            t.add_argument("--N", type=int, default=6)
            t.add_argument("--k", type=int, default=2)
            t.add_argument("--draws", type=int, default=30000)
    return ap


def main(argv=None, stdout=None, stderr=None) -> int:
    out = stdout if stdout is not None else sys.stdout.buffer
    err = stderr if stderr is not None else sys.stderr
    try:
        a = build_parser().parse_args(argv)
        if getattr(a, "model", None) == "copy" and a.n0 is None:
            a.n0 = a.d + 1
        return a.func(a, out, err)
    except GraphForgeError as exc:
        print(f"error: {exc}", file=err)
        return exit_code(exc)
    except OSError as exc:
        print(f"error: {exc}", file=err)
        return 1


def main_exit() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_exit()
