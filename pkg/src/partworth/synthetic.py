"""Synthetic choice generators with known ground truth.

Each generator records its generating rule and the Bayes-optimal accuracy in
the dataset meta, so fitted models can be scored against a known ceiling.
"""

import numpy as np

from .datasets import ChoiceDataset
from .errors import ValidationError
from .linear import PartworthTable
from .nn.layers import stable_sigmoid
from .schema import AttributeSchema

# exact Bayes enumeration is quadratic in the item count; beyond this we sample
MAX_ENUM_ITEMS = 4096


def random_partworths(schema: AttributeSchema, seed: int, scale: float = 1.0) -> PartworthTable:
    rng = np.random.default_rng(seed)
    return PartworthTable(schema, scale * rng.standard_normal(schema.width))


def _uniform_items(schema: AttributeSchema, n: int, rng: np.random.Generator) -> np.ndarray:
    counts = schema.level_counts()
    out = np.empty((n, schema.m), dtype=np.int64)
    for i in range(schema.m):
        out[:, i] = rng.integers(0, counts[i], size=n)
    return out


def _bayes_accuracy_linear(schema: AttributeSchema, w: PartworthTable,
                           rng: np.random.Generator) -> tuple[float, bool]:
    """E[max(p, 1-p)] over uniform item pairs; exact when enumeration fits."""
    n_items = schema.n_items()
    if n_items <= MAX_ENUM_ITEMS:
        items = np.array(list(schema.iter_items()), dtype=np.int64)
        u = w.utility_indices(items)
        p = stable_sigmoid(u[:, None] - u[None, :])
        return float(np.maximum(p, 1.0 - p).mean()), True
    a = _uniform_items(schema, 200_000, rng)
    b = _uniform_items(schema, 200_000, rng)
    p = stable_sigmoid(w.utility_indices(a) - w.utility_indices(b))
    return float(np.maximum(p, 1.0 - p).mean()), False


def synth_linear(schema: AttributeSchema, w_star: PartworthTable, n_pairs: int,
                 seed: int) -> ChoiceDataset:
    """Pairs drawn uniformly, labelled by the logistic link on true utilities."""
    if w_star.schema != schema:
        raise ValidationError("w_star schema does not match")
    rng = np.random.default_rng(seed)
    a = _uniform_items(schema, n_pairs, rng)
    b = _uniform_items(schema, n_pairs, rng)
    p = stable_sigmoid(w_star.utility_indices(a) - w_star.utility_indices(b))
    y = (rng.random(n_pairs) < p).astype(np.int64)
    bayes, exact = _bayes_accuracy_linear(schema, w_star, rng)
    meta = {
        "source": "synth_linear",
        "seed": seed,
        "w_star": w_star.values.tolist(),
        "bayes_accuracy": bayes,
        "bayes_exact": exact,
    }
    return ChoiceDataset(schema=schema, pairing="pairwise", y=y, a=a, b=b, meta=meta)


def _interaction_score(schema: AttributeSchema, idx: np.ndarray, kind: str) -> np.ndarray:
    """Binary item score from a non-additive rule over the first two attributes."""
    counts = schema.level_counts()
    if kind == "xor":
        binary = [i for i in range(schema.m) if counts[i] == 2]
        if len(binary) < 2:
            raise ValidationError("xor rule needs a schema with at least 2 binary attributes")
        i0, i1 = binary[:2]
        return (idx[:, i0] ^ idx[:, i1]).astype(np.int64)
    if kind == "threshold":
        if schema.m < 2:
            raise ValidationError("threshold rule needs at least 2 attributes")
        # non-compensatory: both of the first two attributes must clear the
        # upper half of their level range
        t0, t1 = counts[0] // 2, counts[1] // 2
        return ((idx[:, 0] >= t0) & (idx[:, 1] >= t1)).astype(np.int64)
    raise ValidationError(f"unknown interaction kind {kind!r}")


def synth_interaction(schema: AttributeSchema, kind: str, n: int, noise: float,
                      seed: int, pairing: str = "single") -> ChoiceDataset:
    """Labels from a non-additive rule (XOR parity or a min-threshold rule).

    Single mode emits (x, y) with y = rule(x) flipped with probability
    ``noise``. Pairwise mode draws option pairs with differing rule scores
    (ties are resampled) and labels y=1 when A scores higher, flipped with
    probability ``noise``. Bayes accuracy is 1 - noise either way.
    """
    if not 0.0 <= noise < 0.5:
        raise ValidationError("noise must be in [0, 0.5)")
    rng = np.random.default_rng(seed)
    meta = {"source": f"synth_{kind}", "kind": kind, "seed": seed, "noise": noise,
            "bayes_accuracy": 1.0 - noise}
    flips = rng.random(n) < noise
    if pairing == "single":
        x = _uniform_items(schema, n, rng)
        y = _interaction_score(schema, x, kind) ^ flips.astype(np.int64)
        return ChoiceDataset(schema=schema, pairing="single", y=y, x=x, meta=meta)
    if pairing != "pairwise":
        raise ValidationError(f"unknown pairing {pairing!r}")
    a = _uniform_items(schema, n, rng)
    b = _uniform_items(schema, n, rng)
    for _ in range(10_000):
        tied = _interaction_score(schema, a, kind) == _interaction_score(schema, b, kind)
        if not tied.any():
            break
        b[tied] = _uniform_items(schema, int(tied.sum()), rng)
    else:
        raise ValidationError("could not draw untied pairs; rule may be constant")
    y = (_interaction_score(schema, a, kind) > _interaction_score(schema, b, kind)).astype(np.int64)
    y ^= flips.astype(np.int64)
    return ChoiceDataset(schema=schema, pairing="pairwise", y=y, a=a, b=b, meta=meta)


def synth_clustered(schema: AttributeSchema, n: int, seed: int, n_clusters: int = 4,
                    corruption: float = 0.02) -> ChoiceDataset:
    """Items near one of ``n_clusters`` random prototypes.

    Each attribute independently keeps its prototype level with probability
    1 - corruption, else resamples uniformly. Cluster assignments are kept in
    meta["clusters"]; the dataset itself is unlabeled (for representation
    pretraining).
    """
    if not 0.0 <= corruption < 1.0:
        raise ValidationError("corruption must be in [0, 1)")
    rng = np.random.default_rng(seed)
    prototypes = _uniform_items(schema, n_clusters, rng)
    assign = rng.integers(0, n_clusters, size=n)
    x = prototypes[assign].copy()
    corrupt = rng.random((n, schema.m)) < corruption
    resampled = _uniform_items(schema, n, rng)
    x[corrupt] = resampled[corrupt]
    meta = {
        "source": "synth_clustered",
        "seed": seed,
        "n_clusters": n_clusters,
        "corruption": corruption,
        "prototypes": prototypes.tolist(),
        "clusters": assign.tolist(),
    }
    return ChoiceDataset(schema=schema, pairing="single", y=None, x=x, meta=meta)
