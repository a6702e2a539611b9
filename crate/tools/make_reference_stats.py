#!/usr/bin/env python3
"""Generate frozen reference values for the statistical tests.

Writes crates/audit-stats/tests/data/reference_stats.json with 50 random
instances each for Welch's t-test, the chi-square independence test, and
Spearman rank correlation, computed with scipy.
"""
import json
import numpy as np
from scipy import stats

rng = np.random.default_rng(20260826)

out = {"welch_t": [], "chi_square": [], "spearman": []}

for _ in range(50):
    na, nb = rng.integers(4, 40, size=2)
    a = np.round(rng.normal(rng.uniform(-2, 2), rng.uniform(0.5, 3), na), 6)
    b = np.round(rng.normal(rng.uniform(-2, 2), rng.uniform(0.5, 3), nb), 6)
    t, p = stats.ttest_ind(a, b, equal_var=False)
    out["welch_t"].append(
        {"a": a.tolist(), "b": b.tolist(), "t": float(t), "p": float(p)}
    )

for _ in range(50):
    r, c = rng.integers(2, 5, size=2)
    table = rng.integers(1, 60, size=(r, c))
    chi2, p, dof, _ = stats.chi2_contingency(table, correction=False)
    out["chi_square"].append(
        {"table": table.tolist(), "statistic": float(chi2), "p": float(p)}
    )

for _ in range(50):
    n = int(rng.integers(4, 30))
    a = np.round(rng.normal(0, 1, n), 6)
    b = np.round(0.5 * a + rng.normal(0, 1, n), 6)
    # occasionally force ties to exercise average-rank handling
    if rng.random() < 0.3:
        a[1] = a[0]
    rho, p = stats.spearmanr(a, b)
    out["spearman"].append(
        {"a": a.tolist(), "b": b.tolist(), "rho": float(rho), "p": float(p)}
    )

path = "crates/audit-stats/tests/data/reference_stats.json"
with open(path, "w") as f:
    json.dump(out, f, indent=1)
print("wrote", path)
