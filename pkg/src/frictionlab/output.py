"""Deterministic CSV tables, minimal SVG line charts and run manifests."""

import csv
import hashlib
import math
import os

import numpy as np


def _fmt(x):
    if isinstance(x, (str, bytes)):
        return x
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


def write_csv(path, header, rows):
    """Write ``rows`` under ``header``; floats use 17 significant digits."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(x) for x in row])
    return path


def read_csv(path):
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        return header, [row for row in r]


def sha256_file(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _ticks(lo, hi, log):
    if log:
        a, b = math.floor(lo), math.ceil(hi)
        return [float(t) for t in range(a, b + 1)]
    span = hi - lo or 1.0
    step = 10 ** math.floor(math.log10(span / 4))
    for m in (1, 2, 5, 10):
        if span / (m * step) <= 6:
            step *= m
            break
    start = math.ceil(lo / step) * step
    return list(np.arange(start, hi + 0.5 * step, step))


def svg_line_plot(path, series, title="", xlabel="", ylabel="", logx=False, logy=False,
                  width=640, height=420):
    """Write a self-contained SVG line chart.

    ``series`` is a list of ``(label, x, y)``. Nonpositive values are
    dropped on logarithmic axes.
    """
    ml, mr, mt, mb = 70, 20, 36, 50
    pts = []
    for label, x, y in series:
        x, y = np.asarray(x, float), np.asarray(y, float)
        ok = np.isfinite(x) & np.isfinite(y)
        if logx:
            ok &= x > 0
        if logy:
            ok &= y > 0
        x, y = x[ok], y[ok]
        pts.append((label, np.log10(x) if logx else x, np.log10(y) if logy else y))
    allx = np.concatenate([p[1] for p in pts]) if pts else np.zeros(1)
    ally = np.concatenate([p[2] for p in pts]) if pts else np.zeros(1)
    if allx.size == 0:
        allx = ally = np.zeros(1)
    x0, x1 = float(allx.min()), float(allx.max())
    y0, y1 = float(ally.min()), float(ally.max())
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0
    pw, ph = width - ml - mr, height - mt - mb
    sx = lambda v: ml + (v - x0) / (x1 - x0) * pw
    sy = lambda v: mt + ph - (v - y0) / (y1 - y0) * ph
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
        f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" font-size="13">{title}</text>',
        f'<text x="{ml + pw / 2:.1f}" y="{height - 10}" text-anchor="middle">{xlabel}</text>',
        f'<text x="14" y="{mt + ph / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 14 {mt + ph / 2:.1f})">{ylabel}</text>',
    ]
    for t in _ticks(x0, x1, logx):
        if x0 - 1e-12 <= t <= x1 + 1e-12:
            lab = f"1e{int(t)}" if logx else f"{t:g}"
            out.append(f'<line x1="{sx(t):.2f}" y1="{mt + ph}" x2="{sx(t):.2f}" y2="{mt + ph + 4}" stroke="black"/>')
            out.append(f'<text x="{sx(t):.2f}" y="{mt + ph + 16}" text-anchor="middle">{lab}</text>')
    for t in _ticks(y0, y1, logy):
        if y0 - 1e-12 <= t <= y1 + 1e-12:
            lab = f"1e{int(t)}" if logy else f"{t:g}"
            out.append(f'<line x1="{ml - 4}" y1="{sy(t):.2f}" x2="{ml}" y2="{sy(t):.2f}" stroke="black"/>')
            out.append(f'<text x="{ml - 6}" y="{sy(t) + 4:.2f}" text-anchor="end">{lab}</text>')
    for i, (label, x, y) in enumerate(pts):
        col = PALETTE[i % len(PALETTE)]
        if x.size:
            d = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(x, y))
            out.append(f'<polyline fill="none" stroke="{col}" stroke-width="1.5" points="{d}"/>')
        ly = mt + 14 + 14 * i
        out.append(f'<line x1="{ml + pw - 110}" y1="{ly - 4}" x2="{ml + pw - 90}" y2="{ly - 4}" stroke="{col}" stroke-width="2"/>')
        out.append(f'<text x="{ml + pw - 86}" y="{ly}">{label}</text>')
    out.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(out) + "\n")
    return path


def write_manifest(out_dir, command, config_text, files, wall_time, version):
    """Plain-text manifest: tool version, command, resolved config, files with checksums."""
    path = os.path.join(out_dir, "manifest.txt")
    lines = [
        f"tool = frictionlab {version}",
        f"command = {command}",
        f"wall_time_s = {wall_time:.3f}",
        "",
        "[resolved config]",
        config_text.rstrip(),
        "",
        "[files]",
    ]
    for f in sorted(files):
        lines.append(f"{os.path.basename(f)}  sha256={sha256_file(f)}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    return path
