"""Spectral and differential audit of four lightweight-cipher S-boxes read as F_2^4 -> Z_16."""
from __future__ import annotations

from gbent import crypto

for name in ("PRESENT", "GIFT", "PRINCE", "SKINNY"):
    rep = crypto.sbox_audit(crypto.preset(name), l=2, seed=0)
    print(crypto.audit_text(rep))
    print()

# the modular and XOR tables answer different questions
s = crypto.preset("PRESENT")
f = s.as_gbf()
print("PRESENT modular DDT spectrum:", crypto.ddt(f).spectrum())
print("PRESENT XOR DDT spectrum:    ", crypto.ddt(f, "xor").spectrum())
