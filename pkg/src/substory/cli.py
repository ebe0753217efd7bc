"""Command line entry point: ``substory run``, ``substory compare`` and ``substory synth``."""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import fields, replace

from . import hdp, lsh, spectral
from .corpus import CorpusError, PreprocessOptions, SynthSpec, read_stopwords, synth_generate, write_jsonl
from .pipeline import METHODS, MODES, PipelineError, RunConfig, compare, run

log = logging.getLogger("substory")


def _add_method_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("method parameters")
    g.add_argument("--k", type=int, help="HDP topic cap or number of SC word clusters")
    g.add_argument("--npmi-threshold", type=float)
    g.add_argument("--min-word-freq", type=int)
    g.add_argument("--k-bits", type=int)
    g.add_argument("--tables", type=int)
    g.add_argument("--bucket-size", type=int)
    g.add_argument("--cosine-threshold", type=float,
                   help="LSH join threshold (default 0.5; not given in the original method, set deliberately)")
    g.add_argument("--preset", choices=sorted(lsh.PRESETS), help="LSH shorthand, e.g. k12h56b10")
    g.add_argument("--sweeps", type=int)
    g.add_argument("--burn-in", type=int)
    g.add_argument("--eta", type=float)
    g.add_argument("--chains", type=int, help="HDP chains (best held-out likelihood kept)")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", required=True, help="JSON Lines tweets")
    p.add_argument("--mode", choices=MODES, default="all-tweets")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--partition-size", type=int, help="run per time-contiguous partition of this many tweets")
    p.add_argument("--bucket-hours", type=float, default=1.0, help="temporal profile bucket width")
    p.add_argument("--top-n", type=int, default=10)
    p.add_argument("--stopwords", help="stopword file, one word per line (overrides $SUBSTORY_STOPWORDS)")
    p.add_argument("--min-token-len", type=int, default=2)
    p.add_argument("--no-stem", action="store_true")


def _method_configs(args, method: str) -> dict:
    h, s, l = hdp.HdpConfig(), spectral.SpectralConfig(), lsh.LshConfig()
    if method == "hdp":
        upd = {"max_topics": args.k, "sweeps": args.sweeps, "burn_in": args.burn_in, "eta": args.eta,
               "n_chains": args.chains}
        upd = {k: v for k, v in upd.items() if v is not None}
        if "sweeps" in upd and "burn_in" not in upd:
            upd["burn_in"] = upd["sweeps"] // 2
        h = replace(h, **upd)
    elif method == "sc":
        upd = {"k": args.k, "npmi_threshold": args.npmi_threshold, "min_word_freq": args.min_word_freq}
        s = replace(s, **{k: v for k, v in upd.items() if v is not None})
    elif method == "lsh":
        if args.preset:
            l = lsh.preset(args.preset)
        if args.cosine_threshold is None:
            log.warning("LSH cosine threshold not set; using default %.2f", l.cosine_threshold)
        upd = {"k_bits": args.k_bits, "n_tables": args.tables, "bucket_size": args.bucket_size,
               "cosine_threshold": args.cosine_threshold}
        l = replace(l, **{k: v for k, v in upd.items() if v is not None})
    return {"hdp": h, "sc": s, "lsh": l}


def _run_config(args, method: str, out: str, label: str | None = None) -> RunConfig:
    opts = PreprocessOptions(min_token_len=args.min_token_len,
                             stopwords=read_stopwords(args.stopwords) if args.stopwords else None,
                             stem=not args.no_stem)
    return RunConfig(input=args.input, method=method, mode=args.mode, out=out, seed=args.seed,
                     preprocess=opts, partition_size=args.partition_size,
                     bucket_seconds=max(1, int(round(args.bucket_hours * 3600))), top_n=args.top_n,
                     label=label, **_method_configs(args, method))


def _parse_run_spec(spec: str, parser: argparse.ArgumentParser, base_args) -> RunConfig:
    """``method[:key=value,...]`` where keys are long flag names without dashes, e.g.
    ``lsh:preset=k13h71b10`` or ``hdp:k=300,sweeps=200``."""
    method, _, rest = spec.partition(":")
    argv = ["--input", base_args.input, "--out", base_args.out]
    for item in filter(None, rest.split(",")):
        key, _, value = item.partition("=")
        argv += [f"--{key.strip().replace('_', '-')}", value.strip()]
    sub = argparse.ArgumentParser(add_help=False)
    _add_method_flags(sub)
    sub.add_argument("--input")
    sub.add_argument("--out")
    parsed = sub.parse_args(argv)
    for f in ("mode", "seed", "partition_size", "bucket_hours", "top_n", "stopwords", "min_token_len", "no_stem"):
        setattr(parsed, f, getattr(base_args, f))
    if method not in METHODS:
        parser.error(f"unknown method in --run {spec!r}")
    return _run_config(parsed, method, base_args.out)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="substory", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="cluster one corpus with one method")
    _add_common(p)
    p.add_argument("--method", choices=METHODS, required=True)
    _add_method_flags(p)

    p = sub.add_parser("compare", help="run several method configurations and tabulate them")
    _add_common(p)
    p.add_argument("--run", action="append", required=True, dest="runs",
                   help="method[:flag=value,...]; repeat for each configuration")

    p = sub.add_parser("synth", help="write a synthetic labeled corpus")
    p.add_argument("--out", required=True)
    for f in fields(SynthSpec):
        if f.type in ("int", "float"):
            p.add_argument("--" + f.name.replace("_", "-"), type=int if f.type == "int" else float,
                           default=f.default)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "run":
            res = run(_run_config(args, args.method, args.out))
            summary = {k: res.metrics[k] for k in ("P_micro", "R_micro", "F_micro", "AMI", "n_clusters")} \
                if res.metrics else {"n_clusters": len(set(res.clustering.values()))}
            print(" ".join(f"{k}={v:.4f}" if isinstance(v, float) else f"{k}={v}" for k, v in summary.items()))
            print(f"total_seconds={res.timing['total_seconds']:.2f} artifacts={args.out}")
        elif args.command == "compare":
            configs = [_parse_run_spec(s, parser, args) for s in args.runs]
            rows = compare(configs, args.out)
            for r in rows:
                print(f"{r['name']:<24} P={r['P_micro']:.4f} R={r['R_micro']:.4f} F={r['F_micro']:.4f} "
                      f"AMI={r['AMI']:.4f} clusters={r['n_clusters']} t={r['runtime_seconds']:.2f}s")
        elif args.command == "synth":
            spec = SynthSpec(**{f.name: getattr(args, f.name) for f in fields(SynthSpec)
                                if hasattr(args, f.name)})
            write_jsonl(synth_generate(spec), args.out)
    except (CorpusError, PipelineError, ValueError, OSError) as exc:
        print(f"substory: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
