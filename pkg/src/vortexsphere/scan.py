"""Parameter-plane stability scans and figure-ready exports.

Each scan classifies every cell of a 2-parameter grid and records a
one-letter verdict code: S (Lyapunov stable), E (elliptic), U (linearly
unstable), D (degenerate) or X (no valid equilibrium at that cell).
Results serialize to CSV deterministically and to a simple SVG heat map
with frontier polylines extracted by marching squares.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
from skimage import measure

from .families import build_ring_pole, build_ring_two_poles, solve_two_ring_kappa
from .stability import (
    DEGENERATE,
    ELLIPTIC,
    LINEARLY_UNSTABLE,
    LYAPUNOV_STABLE,
    classify,
    classify_two_rings,
)

__all__ = ["Axis", "ScanResult", "scan_ring_pole", "scan_two_rings",
           "scan_ring_two_poles", "extract_frontier", "VERDICT_CODES"]

VERDICT_CODES = {
    LYAPUNOV_STABLE: "S",
    ELLIPTIC: "E",
    LINEARLY_UNSTABLE: "U",
    DEGENERATE: "D",
}
INVALID_CODE = "X"

PALETTE = {"S": "#2ca02c", "E": "#ffdf00", "U": "#d62728",
           "D": "#808080", "X": "#ffffff"}


@dataclass(frozen=True)
class Axis:
    name: str
    start: float
    stop: float
    resolution: int

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.resolution)


@dataclass
class ScanResult:
    """Grid of verdicts over two parameters.

    Arrays are indexed [i, j] with i along axis1 and j along axis2.
    """

    family: str
    axis1: Axis
    axis2: Axis
    codes: np.ndarray  # (r1, r2) of single-char strings
    margins: np.ndarray
    kappas: np.ndarray
    xis: np.ndarray
    mus: np.ndarray
    metadata: Dict[str, str] = field(default_factory=dict)

    def counts(self) -> Dict[str, int]:
        codes, counts = np.unique(self.codes, return_counts=True)
        return dict(zip(codes.tolist(), counts.tolist()))

    def to_csv(self) -> str:
        v1, v2 = self.axis1.values(), self.axis2.values()
        lines = [f"# family={self.family}"]
        for k in sorted(self.metadata):
            lines.append(f"# {k}={self.metadata[k]}")
        lines.append(f"# param1={self.axis1.name} param2={self.axis2.name}")
        lines.append("param1,param2,verdict,margin,kappa,xi,mu_z")
        for i in range(self.axis1.resolution):
            for j in range(self.axis2.resolution):
                lines.append(",".join([
                    repr(float(v1[i])), repr(float(v2[j])),
                    str(self.codes[i, j]),
                    repr(float(self.margins[i, j])),
                    repr(float(self.kappas[i, j])),
                    repr(float(self.xis[i, j])),
                    repr(float(self.mus[i, j])),
                ]))
        return "\n".join(lines) + "\n"

    def to_svg(self, width: int = 640, height: int = 640,
               with_frontiers: bool = True) -> str:
        r1, r2 = self.axis1.resolution, self.axis2.resolution
        cw, ch = width / r1, height / r2
        parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
            f'height="{height}" viewBox="0 0 {width} {height}">'
        ]
        for i in range(r1):
            for j in range(r2):
                color = PALETTE[str(self.codes[i, j])]
                # axis2 increases upward
                x, y = i * cw, height - (j + 1) * ch
                parts.append(
                    f'<rect x="{x:.2f}" y="{y:.2f}" width="{cw + 0.5:.2f}" '
                    f'height="{ch + 0.5:.2f}" fill="{color}"/>')
        if with_frontiers:
            v1, v2 = self.axis1.values(), self.axis2.values()

            def to_px(p1, p2):
                u = (p1 - v1[0]) / (v1[-1] - v1[0]) * (width - cw) + cw / 2
                w = height - ((p2 - v2[0]) / (v2[-1] - v2[0]) * (height - ch) + ch / 2)
                return u, w

            for line in extract_frontier(self):
                pts = " ".join(f"{x:.2f},{y:.2f}"
                               for x, y in (to_px(p1, p2) for p1, p2 in line))
                parts.append(f'<polyline points="{pts}" fill="none" '
                             f'stroke="black" stroke-width="1"/>')
        parts.append("</svg>")
        return "\n".join(parts) + "\n"


def _run_grid(family, axis1, axis2, cell, threads=1, metadata=None) -> ScanResult:
    r1, r2 = axis1.resolution, axis2.resolution
    codes = np.full((r1, r2), INVALID_CODE, dtype="U1")
    margins = np.full((r1, r2), np.nan)
    kappas = np.full((r1, r2), np.nan)
    xis = np.full((r1, r2), np.nan)
    mus = np.full((r1, r2), np.nan)
    v1, v2 = axis1.values(), axis2.values()

    def do_row(i):
        for j in range(r2):
            out = cell(v1[i], v2[j])
            if out is None:
                continue
            codes[i, j], margins[i, j], kappas[i, j], xis[i, j], mus[i, j] = out

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            list(ex.map(do_row, range(r1)))
    else:
        for i in range(r1):
            do_row(i)
    return ScanResult(family=family, axis1=axis1, axis2=axis2, codes=codes,
                      margins=margins, kappas=kappas, xis=xis, mus=mus,
                      metadata=dict(metadata or {}))


def _report_cell(report) -> Tuple[str, float, float, float, float]:
    kap = report.kappa if report.kappa is not None else np.nan
    return (VERDICT_CODES[report.verdict], report.margin, kap,
            report.xi, report.mu_z)


def scan_ring_pole(n: int, theta0_range: Tuple[float, float] = (0.05, np.pi - 0.05),
                   kappa_range: Tuple[float, float] = (-5.0, 5.0),
                   resolution: int = 200, tol_eig: Optional[float] = None,
                   threads: int = 1) -> ScanResult:
    """Classify the (theta0, kappa) plane for a ring with one polar
    vortex."""
    axis1 = Axis("theta0", *theta0_range, resolution)
    axis2 = Axis("kappa", *kappa_range, resolution)

    def cell(t0, kap):
        if kap == 0.0:
            return None
        try:
            re = build_ring_pole(n, t0, kap)
            return _report_cell(classify(re, tol_eig=tol_eig))
        except Exception:
            return None

    return _run_grid("ring_pole", axis1, axis2, cell, threads,
                     {"n": str(n)})


def scan_two_rings(n: int, theta0_range: Tuple[float, float] = (0.05, np.pi / 2),
                   theta1_range: Tuple[float, float] = (0.05, np.pi - 0.05),
                   staggered: bool = False, resolution: int = 200,
                   tol_eig: Optional[float] = None,
                   threads: int = 1) -> ScanResult:
    """Classify the (theta0, theta1) plane for two n-rings; the second
    ring's vorticity is solved from the geometry at every cell."""
    axis1 = Axis("theta0", *theta0_range, resolution)
    axis2 = Axis("theta1", *theta1_range, resolution)

    def cell(t0, t1):
        try:
            sol = solve_two_ring_kappa(n, t0, t1, staggered=staggered)
            if sol.status != "unique":
                return None
            rep = classify_two_rings(n, t0, t1, staggered=staggered,
                                     tol_eig=tol_eig)
            return _report_cell(rep)
        except Exception:
            return None

    kind = "two_staggered_rings" if staggered else "two_aligned_rings"
    return _run_grid(kind, axis1, axis2, cell, threads, {"n": str(n)})


def scan_ring_two_poles(n: int, theta0_range: Tuple[float, float] = (0.05, np.pi / 2),
                        kappa_n_range: Tuple[float, float] = (-5.0, 5.0),
                        kappa_s: float = 1.0, resolution: int = 200,
                        tol_eig: Optional[float] = None,
                        threads: int = 1) -> ScanResult:
    """Classify the (theta0, kappa_N) plane for a ring with two polar
    vortices at fixed kappa_S."""
    if kappa_s == 0.0:
        raise ValueError("kappa_s must be nonzero")
    axis1 = Axis("theta0", *theta0_range, resolution)
    axis2 = Axis("kappaN", *kappa_n_range, resolution)

    def cell(t0, kn):
        if kn == 0.0:
            return None
        try:
            re = build_ring_two_poles(n, t0, kn, kappa_s)
            return _report_cell(classify(re, tol_eig=tol_eig))
        except Exception:
            return None

    return _run_grid("ring_two_poles", axis1, axis2, cell, threads,
                     {"n": str(n), "kappa_s": repr(float(kappa_s))})


def extract_frontier(result: ScanResult) -> List[np.ndarray]:
    """Polylines separating verdict regions, in parameter coordinates.

    Marching squares runs on the indicator of each verdict code except
    the most frequent one (whose boundary is already traced by the
    others)."""
    counts = result.counts()
    if len(counts) <= 1:
        return []
    skip = max(counts, key=lambda c: counts[c])
    v1, v2 = result.axis1.values(), result.axis2.values()
    lines: List[np.ndarray] = []
    for code in sorted(counts):
        if code == skip:
            continue
        mask = (result.codes == code).astype(float)
        for contour in measure.find_contours(mask, 0.5):
            p1 = np.interp(contour[:, 0], np.arange(len(v1)), v1)
            p2 = np.interp(contour[:, 1], np.arange(len(v2)), v2)
            lines.append(np.column_stack([p1, p2]))
    return lines
