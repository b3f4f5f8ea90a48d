#!/usr/bin/env python3
"""Render qkr output CSVs as standalone SVG plots (no third-party deps).

Usage:
  tools/plot_csv.py transition out/transition.csv [-o transition.svg]
  tools/plot_csv.py phase out/phase.csv [-o phase.svg]
  tools/plot_csv.py hist out/spacing_hist.csv [--refs out/reference_curves.csv]
  tools/plot_csv.py density out/re_density.csv

Subcommands map to the CSVs the CLI emits: the <r>(lambda) transition curve,
the real-fraction phase diagram (drawn as a colored grid), a spacing histogram
with optional reference curves, and a quasi-energy density histogram.
"""

import argparse
import csv
import math
import sys


def read_csv(path):
    rows = []
    with open(path, newline="") as f:
        for row in csv.reader(f):
            if not row or row[0].startswith("#"):
                continue
            rows.append(row)
    if not rows:
        sys.exit(f"{path}: no data rows")
    header, body = rows[0], rows[1:]
    cols = {name: i for i, name in enumerate(header)}
    return cols, body


def fget(row, cols, name):
    v = row[cols[name]]
    return float(v) if v not in ("", "nan") else math.nan


def esc(s):
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


class Svg:
    W, H = 760, 520
    ML, MR, MT, MB = 70, 20, 20, 55

    def __init__(self, xlim, ylim, xlog=False):
        self.xlim, self.ylim, self.xlog = xlim, ylim, xlog
        self.parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.W}" height="{self.H}" '
            f'font-family="sans-serif" font-size="13">',
            f'<rect width="{self.W}" height="{self.H}" fill="white"/>',
        ]

    def xmap(self, x):
        lo, hi = self.xlim
        if self.xlog:
            x, lo, hi = math.log10(x), math.log10(lo), math.log10(hi)
        t = (x - lo) / (hi - lo)
        return self.ML + t * (self.W - self.ML - self.MR)

    def ymap(self, y):
        lo, hi = self.ylim
        t = (y - lo) / (hi - lo)
        return self.H - self.MB - t * (self.H - self.MT - self.MB)

    def axes(self, xlabel, ylabel, xticks, yticks):
        x0, x1 = self.ML, self.W - self.MR
        y0, y1 = self.H - self.MB, self.MT
        self.parts.append(
            f'<rect x="{x0}" y="{y1}" width="{x1 - x0}" height="{y0 - y1}" '
            f'fill="none" stroke="black"/>'
        )
        for xt in xticks:
            px = self.xmap(xt)
            label = f"1e{int(round(math.log10(xt)))}" if self.xlog else f"{xt:g}"
            self.parts.append(f'<line x1="{px:.1f}" y1="{y0}" x2="{px:.1f}" y2="{y0 + 5}" stroke="black"/>')
            self.parts.append(f'<text x="{px:.1f}" y="{y0 + 20}" text-anchor="middle">{label}</text>')
        for yt in yticks:
            py = self.ymap(yt)
            self.parts.append(f'<line x1="{x0 - 5}" y1="{py:.1f}" x2="{x0}" y2="{py:.1f}" stroke="black"/>')
            self.parts.append(f'<text x="{x0 - 9}" y="{py + 4:.1f}" text-anchor="end">{yt:g}</text>')
        self.parts.append(
            f'<text x="{(x0 + x1) / 2}" y="{self.H - 12}" text-anchor="middle">{esc(xlabel)}</text>'
        )
        self.parts.append(
            f'<text x="18" y="{(y0 + y1) / 2}" text-anchor="middle" '
            f'transform="rotate(-90 18 {(y0 + y1) / 2})">{esc(ylabel)}</text>'
        )

    def polyline(self, pts, color, width=1.8, dash=""):
        d = f' stroke-dasharray="{dash}"' if dash else ""
        coords = " ".join(f"{self.xmap(x):.1f},{self.ymap(y):.1f}" for x, y in pts)
        self.parts.append(f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="{width}"{d}/>')

    def dots(self, pts, color, r=3):
        for x, y in pts:
            self.parts.append(f'<circle cx="{self.xmap(x):.1f}" cy="{self.ymap(y):.1f}" r="{r}" fill="{color}"/>')

    def vbar(self, x, y1, y2, color):
        self.parts.append(
            f'<line x1="{self.xmap(x):.1f}" y1="{self.ymap(y1):.1f}" '
            f'x2="{self.xmap(x):.1f}" y2="{self.ymap(y2):.1f}" stroke="{color}" stroke-width="1.2"/>'
        )

    def rect_data(self, x0, x1, y0, y1, color):
        px0, px1 = self.xmap(x0), self.xmap(x1)
        py0, py1 = self.ymap(y1), self.ymap(y0)
        self.parts.append(
            f'<rect x="{px0:.1f}" y="{py0:.1f}" width="{px1 - px0:.1f}" '
            f'height="{py1 - py0:.1f}" fill="{color}" stroke="none"/>'
        )

    def legend(self, entries):
        y = self.MT + 16
        for label, color in entries:
            self.parts.append(f'<line x1="{self.W - 190}" y1="{y - 4}" x2="{self.W - 160}" y2="{y - 4}" stroke="{color}" stroke-width="2.5"/>')
            self.parts.append(f'<text x="{self.W - 152}" y="{y}">{esc(label)}</text>')
            y += 18

    def save(self, path):
        self.parts.append("</svg>")
        with open(path, "w") as f:
            f.write("\n".join(self.parts))
        print(f"wrote {path}")


def log_ticks(lo, hi):
    return [10.0 ** e for e in range(math.ceil(math.log10(lo)), math.floor(math.log10(hi)) + 1)]


def lin_ticks(lo, hi, n=6):
    step = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(step))
    for mult in (1, 2, 2.5, 5, 10):
        if mag * mult >= step:
            step = mag * mult
            break
    first = math.ceil(lo / step) * step
    out = []
    while first <= hi + 1e-12 * abs(hi):
        out.append(round(first, 12))
        first += step
    return out


def plot_transition(args):
    cols, body = read_csv(args.csv)
    pts = [(fget(r, cols, "lambda"), fget(r, cols, "r_mean"), fget(r, cols, "r_stderr")) for r in body]
    pts = [p for p in pts if not math.isnan(p[1])]
    lams = [p[0] for p in pts]
    svg = Svg((min(lams) / 1.5, max(lams) * 1.5), (0.45, 0.8), xlog=True)
    svg.axes("lambda", "<r>", log_ticks(min(lams), max(lams)), lin_ticks(0.45, 0.8))
    for ref, color in ((0.5687, "#999"), (0.7218, "#999")):
        svg.polyline([(svg.xlim[0], ref), (svg.xlim[1], ref)], color, 1.0, dash="5,4")
    for x, y, se in pts:
        svg.vbar(x, y - se, y + se, "#1f77b4")
    svg.polyline([(x, y) for x, y, _ in pts], "#1f77b4")
    svg.dots([(x, y) for x, y, _ in pts], "#1f77b4")
    svg.save(args.out or "transition.svg")


def plot_phase(args):
    cols, body = read_csv(args.csv)
    cells = [(fget(r, cols, "k"), fget(r, cols, "lambda"), fget(r, cols, "P")) for r in body]
    ks = sorted({c[0] for c in cells})
    lams = sorted({c[1] for c in cells if c[1] > 0})
    if not lams:
        sys.exit("phase grid has no positive lambda column to draw on a log axis")
    svg = Svg((min(ks) / 1.3, max(ks) * 1.3), (0.0, 1.0), xlog=False)
    # draw as a grid in index space: recreate with linear index axes instead
    svg = Svg((-0.5, len(ks) - 0.5), (-0.5, len(lams) - 0.5))
    svg.axes("k grid index", "lambda grid index",
             lin_ticks(0, len(ks) - 1, min(6, len(ks))), lin_ticks(0, len(lams) - 1, min(6, len(lams))))
    kpos = {k: i for i, k in enumerate(ks)}
    lpos = {l: i for i, l in enumerate(lams)}
    for k, lam, P in cells:
        if lam not in lpos:
            continue
        if math.isnan(P):
            color = "#bbbbbb"
        else:
            # P = 1 (all real) dark blue -> P = 0 (all complex) yellow
            g = int(235 * (1 - P))
            color = f"rgb({g},{g},{int(120 + 100 * P)})"
        svg.rect_data(kpos[k] - 0.5, kpos[k] + 0.5, lpos[lam] - 0.5, lpos[lam] + 0.5, color)
    svg.parts.append(f'<text x="{svg.ML}" y="14">real fraction P: dark = 1, light = 0; '
                     f'k in [{ks[0]:g}, {ks[-1]:g}], lambda in [{lams[0]:.2e}, {lams[-1]:.2e}]</text>')
    svg.save(args.out or "phase.svg")


def plot_hist(args):
    cols, body = read_csv(args.csv)
    bars = [(fget(r, cols, "bin_left"), fget(r, cols, "bin_right"), fget(r, cols, "density"))
            for r in body]
    top = max(1.05, 1.1 * max(b[2] for b in bars))
    svg = Svg((0.0, bars[-1][1]), (0.0, top))
    svg.axes("s", "P(s)", lin_ticks(0, bars[-1][1]), lin_ticks(0, top))
    for lo, hi, d in bars:
        if d > 0:
            svg.rect_data(lo, hi, 0, d, "#b7cfe8")
            svg.polyline([(lo, d), (hi, d)], "#1f77b4", 1.2)
    if args.refs:
        rcols, rbody = read_csv(args.refs)
        entries = []
        for name, color in (("poisson", "#2ca02c"), ("goe", "#d62728"),
                            ("gue", "#9467bd"), ("brody", "#ff7f0e")):
            if name not in rcols:
                continue
            pts = [(fget(r, rcols, "s"), fget(r, rcols, name)) for r in rbody]
            svg.polyline([p for p in pts if p[1] <= top], color, 1.6)
            entries.append((name, color))
        svg.legend(entries)
    svg.save(args.out or "spacing_hist.svg")


def plot_density(args):
    cols, body = read_csv(args.csv)
    bars = [(fget(r, cols, "bin_left"), fget(r, cols, "bin_right"), fget(r, cols, "density"))
            for r in body]
    top = 1.15 * max(b[2] for b in bars) or 1.0
    svg = Svg((bars[0][0], bars[-1][1]), (0.0, top))
    svg.axes("value", "density", lin_ticks(bars[0][0], bars[-1][1]), lin_ticks(0, top))
    for lo, hi, d in bars:
        if d > 0:
            svg.rect_data(lo, hi, 0, d, "#b7cfe8")
            svg.polyline([(lo, d), (hi, d)], "#1f77b4", 1.2)
    svg.save(args.out or "density.svg")


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="cmd", required=True)
    for name, fn in (("transition", plot_transition), ("phase", plot_phase),
                     ("hist", plot_hist), ("density", plot_density)):
        p = sub.add_parser(name)
        p.add_argument("csv")
        p.add_argument("-o", "--out")
        if name == "hist":
            p.add_argument("--refs", help="reference_curves.csv to overlay")
        p.set_defaults(fn=fn)
    args = ap.parse_args()
    args.fn(args)


if __name__ == "__main__":
    main()
