"""Writes the cross-hatched background mesh of the bending beam.

Diamond (45 degree) quads inside, half diamonds (tri3) along the border.
Usage: python3 make_beam_mesh.py OUT [--length 1.5] [--height 1.0] [--spacing 0.125]
"""
import argparse

parser = argparse.ArgumentParser()
parser.add_argument("out")
parser.add_argument("--length", type=float, default=1.5)
parser.add_argument("--height", type=float, default=1.0)
parser.add_argument("--spacing", type=float, default=0.125)
args = parser.parse_args()

d = args.spacing
nx = round(args.length / d)
ny = round(args.height / d)
if nx % 2 or ny % 2 or abs(nx * d - args.length) > 1e-12 or abs(ny * d - args.height) > 1e-12:
    raise SystemExit("length and height must be even multiples of the spacing")

ids = {}
coords = []
for j in range(ny + 1):
    for i in range(nx + 1):
        if (i + j) % 2 == 0:
            ids[(i, j)] = len(coords)
            coords.append((i * d, -0.5 * args.height + j * d))

elements = []
for j in range(ny + 1):
    for i in range(nx + 1):
        if (i + j) % 2 == 1:
            ring = [(i + 1, j), (i, j + 1), (i - 1, j), (i, j - 1)]
            nodes = [ids[v] for v in ring if v in ids]
            elements.append(("quad4" if len(nodes) == 4 else "tri3", nodes))

with open(args.out, "w") as f:
    f.write("# cross-hatched beam background, spacing %.17g\n" % d)
    f.write("nodes %d\n" % len(coords))
    for x, y in coords:
        f.write("%.17g %.17g\n" % (x, y))
    f.write("elements %d\n" % len(elements))
    for tag, nodes in elements:
        f.write(tag + " " + " ".join(str(n) for n in nodes) + "\n")
