"""Compare HDP, SC, LSH and the thread baseline on the directional synthetic fixture, in both modes."""
import argparse
from pathlib import Path

from substory.corpus import DIRECTIONAL_SPEC, synth_generate, write_jsonl
from substory.hdp import HdpConfig
from substory.lsh import preset
from substory.pipeline import RunConfig, compare
from substory.spectral import SpectralConfig


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/directional")
    ap.add_argument("--topics", type=int, default=20, help="HDP topic cap and SC cluster count")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    data = out / "corpus.jsonl"
    write_jsonl(synth_generate(DIRECTIONAL_SPEC), data)
    for mode in ("all-tweets", "source-then-propagate"):
        cfgs = [RunConfig(input=str(data), method="hdp", mode=mode, hdp=HdpConfig(max_topics=args.topics)),
                RunConfig(input=str(data), method="sc", mode=mode, sc=SpectralConfig(k=args.topics)),
                RunConfig(input=str(data), method="lsh", mode=mode, lsh=preset("k12h56b10")),
                RunConfig(input=str(data), method="thread-baseline", mode=mode)]
        rows = compare(cfgs, out / mode)
        print(f"\n{mode}")
        print(f"{'run':<24}{'P':>7}{'R':>7}{'F':>7}{'AMI':>7}{'clusters':>10}{'sec':>7}")
        for r in rows:
            print(f"{r['name']:<24}{r['P_micro']:7.3f}{r['R_micro']:7.3f}{r['F_micro']:7.3f}{r['AMI']:7.3f}"
                  f"{r['n_clusters']:10d}{r['runtime_seconds']:7.1f}")
    print(f"\nartifacts in {out}")


if __name__ == "__main__":
    main()
