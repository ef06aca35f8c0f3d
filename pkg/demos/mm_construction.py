"""Maiorana-McFarland functions over Z_{2^k}: which scaling is gbent, and how carries move digits."""
from __future__ import annotations

import numpy as np

from gbent import GBF, classify
from gbent.adic import check_necessity, decompose
from gbent.crypto import mm_construct

rng = np.random.default_rng(0)
m, k = 2, 4
perm = rng.permutation(1 << m)
g = GBF(m, k, rng.integers(0, 1 << k, 1 << m))
print("pi =", perm.tolist(), " g =", g.table.tolist())

for scale in (1, 1 << (k - 1)):
    res = mm_construct(m, perm, g, l=2, scale=scale)
    rep = classify(res.f)
    print(f"scale {scale}: verdict {rep.verdict}, distinct magnitudes {len(rep.distinct_magnitudes())}")

res = mm_construct(m, perm, g, l=2, scale=1 << (k - 1))
print("digits of f:", res.digits.tolist())
print("one-step carry formula mismatches:", int(res.formula_mismatch.sum()))

d = decompose(res.f, 2)
nec = check_necessity(d, seed=0)
print("derived functions checked:", nec.betas_checked, "+", nec.F_checked, " all match:", nec.ok)
