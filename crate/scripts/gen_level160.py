#!/usr/bin/env python3
"""Regenerate fixtures/level160.raw.json with PARI/GP (cypari2).

The weight-3 level-160 newform with nebentypus (-20/.) is computed with
mfinit/mfeigenbasis, its coefficient field is re-presented by the
polredabs polynomial y^6 + 9y^4 + 14y^2 + 1, and a_1..a_B are written on
the power basis of that polynomial. Run `galimage ingest --from
fixtures/level160.raw.json --output fixtures/level160.json` afterwards to
validate and normalize the file.
"""
import json
import sys

import cypari2

B = int(sys.argv[1]) if len(sys.argv) > 1 else 2000
out = sys.argv[2] if len(sys.argv) > 2 else "fixtures/level160.raw.json"

pari = cypari2.Pari()
pari.allocatemem(2 * 10**9)
pari("mf = mfinit([160, 3, -20], 0); L = mfeigenbasis(mf); P = mffields(mf)[1]")
pari("R = polredabs(P, 1); Q = R[1]; m = lift(R[2])")
pari(f"v = mfcoefs(L[1], {B})")
pari(f"w = vector({B}, n, lift(Mod(subst(lift(v[n+1]), y, Mod(m, Q)), Q)))")

deg = int(pari("poldegree(Q)"))
field_poly = [str(pari(f"polcoef(Q, {i}, y)")) for i in range(deg + 1)]
coeffs = []
for n in range(1, B + 1):
    coeffs.append([str(pari(f"polcoef(w[{n}], {i}, y)")) for i in range(deg)])

doc = {
    "format": "coefficient-file",
    "version": 1,
    "level": 160,
    "weight": 3,
    "nebentypus_discriminant": -20,
    "field_poly": field_poly,
    "basis": "power",
    "source": f"PARI/GP {'.'.join(map(str, pari.version()))}: mfeigenbasis(mfinit([160,3,-20],0))[1], "
              "coefficient field re-presented by polredabs",
    "coefficients": coeffs,
}
with open(out, "w") as fh:
    json.dump(doc, fh)
print(f"wrote {B} coefficients to {out}")
