"""
Equal-frequency binning, step by step
=====================================

Numerical columns have to become categories before anything downstream can
embed or look them up. This walk-through fits cut points on a skewed column,
shows what the bins look like, and lets the granularity selector pick between
10, 100, and 1000 bins using a one-field logistic probe.
"""

import numpy as np

from dnn2lr.discretize import (
    apply_edges,
    bin_index,
    fit_equal_frequency,
    select_granularity,
)

rng = np.random.default_rng(0)

# A log-normal "income" column: long right tail, lots of mass near zero.
income = np.round(np.exp(rng.normal(10.0, 0.8, size=5000)), 2)
print("income range:", income.min(), "to", round(income.max()))

edges = fit_equal_frequency(income, granularity=10)
print("\n10-bin cut points:")
for c in edges.cuts:
    print(f"  {c:12.2f}")

# Equal frequency means equal counts, not equal widths
idx = bin_index(edges, income)
counts = np.bincount(idx, minlength=edges.n_bins())
print("\nper-bin counts:", counts.tolist())
widths = np.diff([income.min(), *edges.cuts, income.max()])
print("per-bin widths:", [round(w) for w in widths])

# Values render as generic labels; missing values keep the empty string
labels = apply_edges(edges, np.array([1000.0, 25000.0, np.nan]))
print("\nsample labels:", labels)

# ---------------------------------------------------------------------- #
# Which granularity is worth it? Make a label that only fine bins can see:
# the target flips with the second decimal digit of a uniform column.

x = rng.uniform(0.0, 1.0, size=8000)
y = ((x * 100).astype(int) % 10 >= 5).astype(np.int8)

g, chosen = select_granularity(x[:6000], y[:6000], x[6000:], y[6000:])
print(f"\nfine-structure label: selector picked granularity {g} "
      f"({len(chosen.cuts)} cuts)")

# And a coarse case: the column itself only has one decimal of resolution,
# so bins beyond 10 cannot add anything and the tie goes to the smallest g.
x_coarse = np.round(x, 1)
y_coarse = (x_coarse > 0.5).astype(np.int8)
g2, _ = select_granularity(x_coarse[:6000], y_coarse[:6000], x_coarse[6000:], y_coarse[6000:])
print(f"coarse label: selector picked granularity {g2}")
