"""LSH nearest-neighbor agreement with brute force on random unit vectors, across dimensions."""
import argparse

import numpy as np

from substory.corpus import TfIdfVector
from substory.lsh import HashTables, nearest_neighbor, preset


def agreement(x: np.ndarray, name: str, streaming: bool) -> tuple[float, int]:
    cfg = preset(name)
    tables = HashTables(x.shape[1], cfg)
    vecs = [TfIdfVector.from_dense(r) for r in x]
    hits = queries = 0
    if not streaming:
        for i, v in enumerate(vecs):
            tables.insert(str(i), v)
    for i, v in enumerate(vecs):
        if streaming:
            if i:
                nn = nearest_neighbor(v, tables)
                hits += nn is not None and nn[0] == str(int(np.argmax(x[:i] @ x[i])))
                queries += 1
            tables.insert(str(i), v)
        else:
            sims = x @ x[i]
            sims[i] = -np.inf
            cands = [(float(c.dot(v)), tid) for _, tid, c in tables.candidates(v) if tid != str(i)]
            best = max(cands, key=lambda t: t[0])[1] if cands else None
            hits += best == str(int(np.argmax(sims)))
            queries += 1
    return hits / queries, tables.max_occupancy


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=1000)
    ap.add_argument("--dims", type=int, nargs="+", default=[2, 3, 5, 8, 10, 16, 32, 64])
    ap.add_argument("--preset", default="k13h71b10")
    ap.add_argument("--seed", type=int, default=6)
    args = ap.parse_args()
    print(f"{'d':>4}{'streaming':>11}{'full index':>12}{'max bucket':>12}")
    for d in args.dims:
        x = np.random.default_rng(args.seed).standard_normal((args.n, d))
        x /= np.linalg.norm(x, axis=1, keepdims=True)
        s, occ = agreement(x, args.preset, streaming=True)
        f, _ = agreement(x, args.preset, streaming=False)
        print(f"{d:4d}{s:11.3f}{f:12.3f}{occ:12d}")


if __name__ == "__main__":
    main()
