"""One SOGD trace against fixed-discount OGD across a dense lambda sweep.

OGD tuned for a single discount does well near that discount and badly far
from it; SOGD should stay under its uniform bound everywhere. The output CSV
(lambda, sogd, ogd_<lam>..., bound) feeds a regret-vs-lambda plot.

    python3 scripts/sogd_vs_ogd.py --gen piecewise-stationary-absolute --out sweep.csv
"""

import argparse
import csv
import sys

import numpy as np

from discounted_oco.cli import sweep_lambdas
from discounted_oco.core import KINDS, Domain, ProblemBounds, make_loss_sequence
from discounted_oco.ogd import run_ogd
from discounted_oco.regret import best_comparator, bound_value, discounted_loss
from discounted_oco.sogd import run_sogd


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--T", type=int, default=8192)
    ap.add_argument("--tau", type=int, default=512)
    ap.add_argument("--gen", choices=KINDS, default="piecewise-stationary-absolute")
    ap.add_argument("--dim", type=int, default=2)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--points", type=int, default=40)
    ap.add_argument("--ogd-lambdas", type=float, nargs="+", help="default: 1-1/T and 1-1/tau")
    ap.add_argument("--out", default="-")
    args = ap.parse_args()
    if args.ogd_lambdas is None:
        args.ogd_lambdas = [1 - 1 / args.T, 1 - 1 / args.tau]

    dom = Domain.ball(np.zeros(args.dim), 0.5)
    bounds = ProblemBounds(1.0, 1.0)

    def fresh():
        return make_loss_sequence(args.gen, args.T, dom, bounds, args.seed)

    # adversarial losses react to the learner, so every learner gets its own copy
    L = fresh()
    run = run_sogd(args.T, args.tau, None, L)
    ogd = {}
    for lam in args.ogd_lambdas:
        Lo = fresh()
        ogd[lam] = (Lo, run_ogd(lam, Lo))

    fh = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["lambda", "sogd"] + [f"ogd_{lam!r}" for lam in args.ogd_lambdas] + ["bound"])
    for lam in sweep_lambdas(args.T, args.tau, args.points):
        lam = float(lam)
        row = [repr(lam), repr(discounted_loss(run.decisions, L, lam) - best_comparator(L, lam).value)]
        for Lo, dec in ogd.values():
            row.append(repr(discounted_loss(dec, Lo, lam) - best_comparator(Lo, lam).value))
        row.append(repr(bound_value("thm3-uniform", G=1, D=1, lam=lam, Z=run.Z, N=run.grid.N)))
        w.writerow(row)
    if fh is not sys.stdout:
        fh.close()


if __name__ == "__main__":
    main()
