"""Measure baseline/full-method accuracy spreads on a candidate bundle.

Used to pick the committed synthetic bundle's generator knobs and the
margins asserted in the quantitative regression tests.
"""

import argparse
import time

import numpy as np

import fewlabel as fl


def run(graph, split, seed, pseudo, model_kind="gcn", dropout=0.5, l2=5e-4,
        max_epochs=600, min_epoch=300):
    model = fl.ModelConfig(kind=model_kind)
    config = fl.TrainConfig(
        max_epochs=max_epochs, l2_rate=l2, dropout=dropout, min_epoch=min_epoch,
    )
    result = fl.train(graph, split, model, pseudo, config, seed)
    return result.test_acc, result.best_epoch, result.epochs_run


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--bundle", required=True)
    parser.add_argument("--splits", type=int, default=3)
    parser.add_argument("--per-class", type=int, default=1)
    parser.add_argument("--threshold", type=float, default=0.4)
    parser.add_argument("--dropout", type=float, default=0.5)
    parser.add_argument("--l2", type=float, default=5e-4)
    parser.add_argument("--negative-weight", type=float, default=1.0)
    parser.add_argument("--model", default="gcn")
    parser.add_argument("--configs", default="supervised,full,nonegative,plain")
    args = parser.parse_args()

    graph = fl.load_bundle(args.bundle)
    variants = {
        "supervised": fl.PseudoConfig(pseudo_weight=0.0, num_positives=0,
                                      num_negatives=0),
        "full": fl.PseudoConfig(pseudo_weight=1.0, threshold=args.threshold,
                                balancing=True,
                                negative_weight=args.negative_weight,
                                num_positives=5, num_negatives=2),
        "nonegative": fl.PseudoConfig(pseudo_weight=1.0, threshold=args.threshold,
                                      balancing=True, num_positives=0,
                                      num_negatives=0),
        "plain": fl.PseudoConfig(pseudo_weight=1.0, threshold=args.threshold,
                                 balancing=False, num_positives=0,
                                 num_negatives=0),
    }
    wanted = args.configs.split(",")
    table = {name: [] for name in wanted}
    for idx in range(args.splits):
        split = fl.make_split(graph, per_class=args.per_class, seed=idx)
        init_seed = fl.derive_seed(idx, "init")
        for name in wanted:
            t0 = time.time()
            acc, best, ran = run(graph, split, init_seed, variants[name],
                                 model_kind=args.model, dropout=args.dropout,
                                 l2=args.l2)
            table[name].append(acc)
            print(f"split {idx} {name:>11}: acc {acc:.3f} "
                  f"(best epoch {best}, ran {ran}, {time.time() - t0:.1f}s)")
    print()
    for name in wanted:
        accs = np.array(table[name])
        print(f"{name:>11}: mean {accs.mean():.3f}  min {accs.min():.3f}  "
              f"max {accs.max():.3f}")


if __name__ == "__main__":
    main()
