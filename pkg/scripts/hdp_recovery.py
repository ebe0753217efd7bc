"""HDP topic recovery on the five-story synthetic corpus across seeds."""
import argparse
import time

from substory.corpus import RECOVERY_SPEC, preprocess, synth_generate
from substory.evaluation import ami
from substory.hdp import HdpConfig, cluster_corpus, fit, report_topics


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--sweeps", type=int, default=500)
    ap.add_argument("--max-topics", type=int, default=20)
    args = ap.parse_args()
    corpus = preprocess(synth_generate(RECOVERY_SPEC))
    gold = corpus.gold()
    for seed in range(args.seeds):
        t0 = time.perf_counter()
        cfg = HdpConfig(max_topics=args.max_topics, sweeps=args.sweeps, burn_in=args.sweeps // 2, seed=seed)
        model = fit(corpus, cfg)
        score = ami(gold, cluster_corpus(corpus, model))
        rep = report_topics(model)
        print(f"seed {seed}: AMI {score:.4f}  topics {len(model.topics)}  alpha {model.alpha:.3g}  "
              f"gamma {model.gamma:.3g}  shared {len(rep['shared'])}  {time.perf_counter() - t0:.1f}s")


if __name__ == "__main__":
    main()
