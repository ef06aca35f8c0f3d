"""Walk through a Z_16 function whose derived Z_4 functions are all bent while f is not.

f = c0 + 4 c1 on F_2^2 with c0 = (0,1,0,3) and c1 = (0,0,1,3).
"""
from __future__ import annotations

import numpy as np

from gbent import GBF, classify
from gbent.adic import decompose, derived_beta, partition_coefficients, verify_basis_test, verify_sufficiency_onehot

c0 = np.array([0, 1, 0, 3])
c1 = np.array([0, 0, 1, 3])
f = GBF(2, 4, c0 + 4 * c1)
print("truth table:", f.table.tolist())

d = decompose(f, 2)
print("digits:", d.components.tolist())
print("cell sizes:", d.cell_sizes())

# each g_beta = c1 + beta c0 is gbent over Z_4
for beta in range(4):
    g = derived_beta(d, [beta])
    rep = classify(g)
    print(f"  g_{beta} = {g.table.tolist()}  verdict {rep.verdict}  |W|^2 = {[int(q) for q in rep.squared_int]}")

rep = classify(f)
print("f verdict:", rep.verdict)
print("|W_f(u)|:", np.round(rep.magnitudes, 4).tolist())

# the partition coefficients show why: no common argument per u
ps = partition_coefficients(d)
for u in range(ps.size):
    print(f"  u={u}: C_alpha(u) =", [complex(round(c.to_complex().real, 3), round(c.to_complex().imag, 3)) for c in ps.nonzero_values(u)])

v = verify_basis_test(d)
print("basis test:", v.verdict, "-", v.reason)
print("one-hot test:", verify_sufficiency_onehot(d).verdict)
