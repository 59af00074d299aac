"""Walk through the column-extremeness dichotomy on classical one-variable
symbols and one genuinely free example.

For a single variable the story is the classical extreme point criterion
for the unit ball of H-infinity: b is extreme iff the Gleason gap
1 - |b(0)|^2 - ||Gleason tuple||^2 closes.  The free letter Z1 in two
variables is already column extreme at degree one, which has no scalar
analogue.

Run:  python3 demos/ce_dichotomy.py
"""

from freehardy import ce_test, complete_column, parse
from freehardy.gleason import CeObstructionError

CASES = [
    ("b = 0", "0", 1, 8),
    ("b = z", "z1", 1, 8),
    ("b = 0.9 z", "0.9*z1", 1, 8),
    ("B = Z1 (d = 2)", "z1", 2, 6),
]


def main():
    for label, expr, d, N in CASES:
        B = parse(expr, d, 4)
        res = ce_test(B, N)
        ladder = res["by_gleason"]["ladder"][0]
        print(f"{label:18s} verdict {res['verdict']:7s} "
              f"gap {ladder['gap_norm']:.6f} "
              f"szego dist {res['by_szego']['distance']:.6f}")
        try:
            out = complete_column(B, N)
            a0 = out["a0"]
            print(f"{'':18s} completion a(0) = {a0.real.round(6).tolist()}")
        except CeObstructionError:
            print(f"{'':18s} no nonzero completion exists")


if __name__ == "__main__":
    main()
