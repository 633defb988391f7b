#!/usr/bin/env python3
"""Regenerate data/units.json with PARI/GP (pip package `cypari`).

For each (D, Delta) the relative order O_F[w], w = (t + sqrt(Delta))/2, is built
as a relative extension of F = Q(sqrt(D)); bnfinit on the absolute quartic gives
fundamental units, which are mapped back to coordinates a + b*w with a, b in
O_F = Z[tau].
"""
import argparse
import json
import sys

from cypari import pari

# (D, Delta) with Delta = m + n*tau
PAIRS = [
    (5, (5, 1)), (5, (6, -1)),
    (8, (5, 0)),
    (12, (8, -4)), (12, (9, 4)), (12, (9, -4)), (12, (5, 0)),
    (17, (21, -8)),
    (21, (5, 0)),
    (24, (2, 0)), (24, (5, 0)),
    (28, (3, 0)), (28, (5, 0)),
    (29, (4, -1)), (29, (3, 1)),
    (33, (5, -1)), (33, (4, 1)),
    (56, (45, -12)),
]


class Ring:
    def __init__(self, D):
        self.k, self.c = (1, (D - 1) // 4) if D % 4 == 1 else (0, D // 4)
        self.poly = f"y^2-y-{self.c}" if self.k else f"y^2-{self.c}"

    def mul(self, a, b):
        m = a[0] * b[0] + self.c * a[1] * b[1]
        n = a[0] * b[1] + a[1] * b[0] + self.k * a[1] * b[1]
        return (m, n)

    def square_class(self, d):
        for u in [(0, 0), (1, 0), (0, 1), (1, 1)]:
            s = self.mul(u, u)
            if (d[0] - s[0]) % 4 == 0 and (d[1] - s[1]) % 4 == 0:
                return u
        raise ValueError(f"{d} has no square class mod 4")


def units(D, delta):
    R = Ring(D)
    t = R.square_class(delta)
    tt = R.mul(t, t)
    n = ((tt[0] - delta[0]) // 4, (tt[1] - delta[1]) // 4)
    nf = pari(f"nfinit({R.poly})")
    rnf = pari.rnfinit(nf, pari(f"x^2 - ({t[0]}+{t[1]}*y)*x + ({n[0]}+{n[1]}*y)"))
    bnf = pari.bnfinit(pari("(r)->r.polabs")(rnf), 1)
    out = []
    for u in pari("(b)->b.fu")(bnf):
        rel = pari.lift(pari.rnfeltabstorel(rnf, u))
        coords = []
        for j in (0, 1):
            c = pari.lift(pari.polcoef(rel, j, "x"))
            coords.append([int(pari.polcoef(c, 0, "y")), int(pari.polcoef(c, 1, "y"))])
        out.append(coords)
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("-o", "--output", default="data/units.json")
    args = ap.parse_args()
    fields = []
    for D, delta in PAIRS:
        fields.append({"D": D, "delta": list(delta), "units": units(D, delta), "source": "pari:bnfinit"})
        print(D, delta, file=sys.stderr)
    with open(args.output, "w") as f:
        f.write('{"fields": [\n')
        f.write(",\n".join("  " + json.dumps(x) for x in fields))
        f.write("\n]}\n")


if __name__ == "__main__":
    main()
