"""Independent reference computations used by the unit and acceptance tests.

Everything here is written the slow, obvious way (explicit loops, enumeration, sampling) and
shares no code with the package.
"""
import math

import numpy as np


def brute_entropy(sizes):
    n = sum(sizes)
    return -sum(s / n * math.log(s / n) for s in sizes if s)


def brute_table(u, v):
    """Dict-of-counts contingency built by pairwise membership scan."""
    rows = sorted(set(u.values()), key=repr)
    cols = sorted(set(v.values()), key=repr)
    return [[sum(1 for t in u if u[t] == r and v[t] == c) for c in cols] for r in rows]


def brute_mi(table):
    n = sum(sum(r) for r in table)
    a = [sum(r) for r in table]
    b = [sum(col) for col in zip(*table)]
    total = 0.0
    for i, row in enumerate(table):
        for j, nij in enumerate(row):
            if nij:
                total += nij / n * math.log(n * nij / (a[i] * b[j]))
    return total


def brute_nmi(table):
    a = [sum(r) for r in table]
    b = [sum(col) for col in zip(*table)]
    h = max(brute_entropy(a), brute_entropy(b))
    return 0.0 if h == 0 else brute_mi(table) / h


def brute_micro_prf(gold, predicted):
    """Max-overlap alignment by exhaustive scan over predicted cluster ids (ties to the lower id)."""
    tp = fp = fn = 0
    labeled = set(gold)
    for story in sorted(set(gold.values()), key=repr):
        members = {t for t in gold if gold[t] == story}
        best, best_ov = None, -1
        for c in sorted(set(predicted[t] for t in labeled), key=lambda x: (type(x).__name__, x)):
            ov = sum(1 for t in members if predicted[t] == c)
            if ov > best_ov:
                best, best_ov = c, ov
        size_c = sum(1 for t in labeled if predicted[t] == best)
        tp += best_ov
        fp += size_c - best_ov
        fn += len(members) - best_ov
    p = tp / (tp + fp) if tp + fp else 0.0
    r = tp / (tp + fn) if tp + fn else 0.0
    f = 2 * p * r / (p + r) if p + r else 0.0
    return p, r, f


def _tables_with_margins(a, b):
    """All nonnegative integer matrices with row sums a and column sums b."""
    if not a:
        if all(x == 0 for x in b):
            yield []
        return

    def rows(total, caps, prefix):
        if len(prefix) == len(caps) - 1:
            last = total - sum(prefix)
            if 0 <= last <= caps[-1]:
                yield prefix + [last]
            return
        for x in range(0, min(caps[len(prefix)], total - sum(prefix)) + 1):
            yield from rows(total, caps, prefix + [x])

    for row in rows(a[0], b, []):
        rest = [bj - x for bj, x in zip(b, row)]
        for tail in _tables_with_margins(a[1:], rest):
            yield [row] + tail


def exact_emi_enumeration(a, b):
    """E[MI] by summing MI over every table with the given margins, weighted by its
    multivariate hypergeometric probability prod a_i! prod b_j! / (N! prod n_ij!)."""
    n = sum(a)
    log_const = sum(math.lgamma(x + 1) for x in a) + sum(math.lgamma(x + 1) for x in b) - math.lgamma(n + 1)
    total = 0.0
    for t in _tables_with_margins(list(a), list(b)):
        lp = log_const - sum(math.lgamma(x + 1) for row in t for x in row)
        total += math.exp(lp) * brute_mi(t)
    return total


def mc_emi(a, b, draws=100_000, seed=0, chunk=20_000):
    """Monte-Carlo E[MI]: shuffle one labeling against the other; returns (mean, standard error)."""
    rng = np.random.default_rng(seed)
    u = np.repeat(np.arange(len(a)), a)
    v = np.repeat(np.arange(len(b)), b)
    n, r, c = len(u), len(a), len(b)
    av = np.asarray(a, float)[:, None]
    bv = np.asarray(b, float)[None, :]
    vals = []
    done = 0
    while done < draws:
        m = min(chunk, draws - done)
        perm = rng.permuted(np.tile(v, (m, 1)), axis=1)
        idx = np.arange(m)[:, None] * (r * c) + u[None, :] * c + perm
        counts = np.bincount(idx.ravel(), minlength=m * r * c).reshape(m, r, c).astype(float)
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(counts > 0, counts / n * np.log(n * counts / (av * bv)), 0.0)
        vals.append(terms.sum(axis=(1, 2)))
        done += m
    vals = np.concatenate(vals)
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(len(vals)))


def integer_partitions(n, max_part=None):
    max_part = n if max_part is None else max_part
    if n == 0:
        yield ()
        return
    for k in range(min(n, max_part), 0, -1):
        for rest in integer_partitions(n - k, k):
            yield (k,) + rest


def brute_nn(X, i):
    """Index of the most cosine-similar earlier row of unit-norm X to row i (first on ties)."""
    sims = X[:i] @ X[i]
    return int(np.argmax(sims))


def labels_from_sizes(sizes, prefix="s"):
    out = {}
    k = 0
    for c, s in enumerate(sizes):
        for _ in range(s):
            out[f"p{k:04d}"] = f"{prefix}{c}"
            k += 1
    return out


def metric_fixtures():
    """Twelve fixed (gold, predicted) pairs over the same tweet universe."""
    fx = [
        ({1: "A", 2: "A", 3: "A", 4: "B", 5: "B"}, {1: "X", 2: "X", 3: "Y", 4: "X", 5: "Y"}),
        ({i: i % 2 for i in range(8)}, {i: i % 2 for i in range(8)}),
        ({i: i % 3 for i in range(9)}, {i: 0 for i in range(9)}),
        ({i: i % 3 for i in range(9)}, {i: i for i in range(9)}),
        ({i: "s" + str(i // 4) for i in range(12)}, {i: i % 4 for i in range(12)}),
        ({i: i // 5 for i in range(20)}, {i: (i // 5 + (i % 5 == 0)) % 4 for i in range(20)}),
    ]
    rng = np.random.default_rng(20140809)
    for n, r, c in [(10, 2, 3), (15, 3, 3), (30, 4, 6), (25, 5, 2), (40, 3, 10), (50, 6, 6)]:
        gold = {f"t{i}": f"g{int(rng.integers(r))}" for i in range(n)}
        pred = {f"t{i}": int(rng.integers(c)) for i in range(n)}
        fx.append((gold, pred))
    return fx


def emi_mc_tables():
    """Margin pairs for the Monte-Carlo EMI check: three per N from 2 to 12."""
    out = []
    for n in range(2, 13):
        out.append(((n // 2, n - n // 2), (1,) * n))  # balanced vs singletons
        out.append(((n - 1, 1), (n // 2, n - n // 2)))  # skewed vs balanced
        k = min(3, n)
        third = tuple(n // k + (i < n % k) for i in range(k))
        out.append((third, (max(1, n - 2),) + (1,) * (n - max(1, n - 2))))
    return out


def table_with_margins(a, b):
    """Some table with the requested margins (north-west corner rule)."""
    a, b = list(a), list(b)
    t = np.zeros((len(a), len(b)), dtype=int)
    i = j = 0
    while i < len(a) and j < len(b):
        x = min(a[i], b[j])
        t[i, j] = x
        a[i] -= x
        b[j] -= x
        if a[i] == 0:
            i += 1
        else:
            j += 1
    return t
