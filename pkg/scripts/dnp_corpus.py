"""Full payoff and potential corpus for the bit predictor.

Prints the smallest margin per (n, Z, check) and flags cells whose discount
lies outside the range where the inequality is proven.

    python3 scripts/dnp_corpus.py --sequences 250 --T 10000
"""

import argparse
from collections import defaultdict

from discounted_oco.special import ConfidenceParams
from discounted_oco.verification import BIT_FAMILIES, payoff_corpus, potential_corpus


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--T", type=int, default=10_000)
    ap.add_argument("--sequences", type=int, default=250)
    ap.add_argument("--cells", nargs="+", default=["256:1024", "1024:8192"], help="n:1/Z pairs")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    for cell in args.cells:
        n, inv_z = (int(v) for v in cell.split(":"))
        p = ConfidenceParams(n, 1 / inv_z)
        etas = [p.rho, (1 + p.rho) / 2, 0.999]
        results = payoff_corpus(p, etas, BIT_FAMILIES, args.sequences, args.T, args.seed)
        results += potential_corpus(p, etas, BIT_FAMILIES, max(1, args.sequences // 5), min(args.T, 2000), args.seed)
        worst = defaultdict(lambda: None)
        for r in results:
            key = (r.check, r.eta)
            if worst[key] is None or r.min_margin < worst[key].min_margin:
                worst[key] = r
        print(f"n={n} Z=1/{inv_z} U={p.U:.4f} rho={p.rho:.6f}")
        for (check, eta), r in sorted(worst.items()):
            note = "" if r.in_hypothesis else "  (outside proven range)"
            flag = "ok" if r.passed else "FAIL"
            print(f"  {check:18s} eta={eta:.6f} min margin {r.min_margin:12.6g} [{r.family}] {flag}{note}")


if __name__ == "__main__":
    main()
