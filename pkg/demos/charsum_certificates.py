"""Structure certificates for weighted supports whose character sums take few magnitudes."""
from __future__ import annotations

from gbent import charsum
from gbent.charsum import FinAbGroup, WeightedSupport
from gbent.cyclotomic import CycInt
from gbent.errors import HypothesisNotMet

g = FinAbGroup([8])

# a subgroup indicator: |mu^| is 0 or |H|
H = sorted(g.subgroup([(2,)]))
ws = WeightedSupport(g, H, [1] * len(H))
cv = charsum.fourier(ws)
print("1_<2> in Z_8, |mu^|:", [round(float(m), 3) for m in cv.magnitudes()])
cert = charsum.certify_overconstrained(ws)
print("certificate:", cert.to_dict())
print("numerology:", charsum.numerology_check(ws))
print("uncertainty:", charsum.uncertainty_check(ws))

# a rotated point mass is still certified
ws = WeightedSupport(g, [(3,)], [CycInt.zeta(3, 5)])
print("rotated point mass:", charsum.certify_overconstrained(ws).to_dict()["S_bar"])

# two points: the character sum has up to three magnitudes in Z_4
for pts in ([(0,), (1,)], [(0,), (2,)]):
    rep = charsum.two_point_analysis(FinAbGroup([4]), *pts, 1, 1)
    print(f"two points {pts} in Z_4: {rep.case}, magnitudes {[round(float(m), 3) for m in rep.magnitudes]}")

# without a common argument the certificate is refused, not guessed
try:
    charsum.certify_overconstrained(WeightedSupport(g, [(0,), (1,)], [1, -1]))
except HypothesisNotMet as exc:
    print("refused:", exc.failed)

# multi-level: the admissible-x search comes back empty
ws = WeightedSupport(g, [(0,), (1,), (3,)], [1, 1, 1])
print("levels:", charsum.magnitude_levels(charsum.fourier(ws)).kind)
try:
    charsum.certify_multilevel(ws)
except HypothesisNotMet as exc:
    print("multi-level refused:", exc.failed)

# iterated sumsets can stall inside a proper subgroup
rep = charsum.sumset_growth_check({(0,), (2,)}, g)
print("|kD| for D = {0, 2} in Z_8:", rep.sizes, "bound met:", rep.ok)
