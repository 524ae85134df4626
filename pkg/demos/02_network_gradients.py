"""
Embedding gradients as local feature weights
============================================

The embedding network scores a row from the concatenation of per-field
embedding vectors. The gradient of the output with respect to one field's
embedding is that field's "local weight": the linear story the network tells
about this one sample. Two checks below: the analytic gradient agrees with
finite differences, and a network built without cross-field wiring tells the
exact same story for every sample, which is what zero inconsistency means.
"""

import numpy as np

from dnn2lr.inconsistency import compute_inconsistency
from dnn2lr.network import EmbeddingDnn

rng = np.random.default_rng(3)

vocab_sizes = [30, 30, 30, 30]
model = EmbeddingDnn(vocab_sizes, embedding_dim=4, hidden=(16, 8), seed=1)

ids = np.stack([rng.integers(2, 30, size=5) for _ in vocab_sizes], axis=1).astype(np.int32)
analytic = model.embedding_gradients(ids, space="probability")

# central finite differences on the embedded input
h = 1e-6
base = model.embed(ids)
fd = np.zeros_like(analytic)
m = model.embedding_dim
for f in range(model.n_fields):
    for j in range(m):
        up, down = base.copy(), base.copy()
        up[:, f * m + j] += h
        down[:, f * m + j] -= h
        fd[:, f, j] = (model.forward_embedded(up) - model.forward_embedded(down)) / (2 * h)

err = np.abs(analytic - fd).max() / np.abs(fd).max()
print(f"max relative error vs finite differences: {err:.2e}")

# The local weight dotted with the embedding is the field's contribution
# scalar; printing it for one sample shows which field the network leans on.
sample = ids[0:1]
w = model.embedding_gradients(sample, space="probability")[0]
e = model.embed(sample)[0].reshape(model.n_fields, m)
print("\nper-field contribution scalars for one sample:")
for f in range(model.n_fields):
    print(f"  field {f}: {float(w[f] @ e[f]):+.5f}")

# ---------------------------------------------------------------------- #
# The additive construction: block-diagonal hidden weights, so field f's
# embedding can only reach field f's slice of the hidden layers. No
# interaction is expressible, and the inconsistency matrix collapses to 0.

additive = EmbeddingDnn.additive(vocab_sizes, embedding_dim=4, seed=2)
ids_big = np.stack([rng.integers(2, 30, size=2000) for _ in vocab_sizes], axis=1).astype(np.int32)
d = compute_inconsistency(additive, ids_big, space="logit").d
print(f"\nadditive network, max inconsistency over 2000 samples: {d.max():.2e}")

# A free-form network of the same size does interact, and it shows.
d_full = compute_inconsistency(model, ids_big, space="logit").d
print(f"unconstrained network, max inconsistency:              {d_full.max():.2e}")
