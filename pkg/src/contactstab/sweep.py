"""Two-parameter stability sweeps producing region maps.

Every grid cell is classified independently (the analysis is a pure function
of the configuration), so cells can run on a process pool; results are
gathered in row-major order regardless of worker count, keeping the output
byte-deterministic.
"""

from __future__ import annotations

import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .configio import SweepSpec, apply_parameter
from .model import GeometryError
from .stability import REGION_LEGEND, REGION_PAINLEVE, classify
from .svgplot import SvgCanvas

REGION_ERROR = 8  # cell failed outside the normal classification pipeline

REGION_COLORS = {
    0: "#d9d9d9",
    1: "#1a1a1a",
    2: "#2166ac",
    3: "#92c5de",
    4: "#b2182b",
    5: "#f4a582",
    6: "#7b3294",
    7: "#fee8c8",
    REGION_ERROR: "#ffff33",
}


@dataclass(frozen=True)
class RegionCell:
    value1: float
    value2: float
    region: int
    marginal: bool


@dataclass(frozen=True)
class RegionMap:
    spec: SweepSpec
    cells: tuple  # row-major: axis1 outer, axis2 inner


def _classify_cell(args):
    spec, v1, v2 = args
    try:
        config = apply_parameter(spec.base, spec.axis1.name, v1)
        config = apply_parameter(config, spec.axis2.name, v2)
        verdict = classify(config, map_points=spec.map_points, refine_depth=24)
        return RegionCell(v1, v2, verdict.region_class, verdict.marginal)
    except GeometryError:
        return RegionCell(v1, v2, REGION_PAINLEVE, True)
    except Exception:
        return RegionCell(v1, v2, REGION_ERROR, True)


def run_sweep(spec: SweepSpec, jobs: int = 1) -> RegionMap:
    tasks = [(spec, v1, v2)
             for v1 in spec.axis1.values()
             for v2 in spec.axis2.values()]
    if jobs <= 1:
        cells = [_classify_cell(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunk = max(1, len(tasks) // (8 * jobs))
            cells = list(pool.map(_classify_cell, tasks, chunksize=chunk))
    return RegionMap(spec=spec, cells=tuple(cells))


def region_csv(rmap: RegionMap) -> str:
    spec = rmap.spec
    out = io.StringIO()
    out.write(f"{spec.axis1.name},{spec.axis2.name},region,marginal\n")
    for cell in rmap.cells:
        out.write(f"{format(cell.value1, '.17g')},{format(cell.value2, '.17g')},"
                  f"{cell.region},{1 if cell.marginal else 0}\n")
    return out.getvalue()


def region_svg(rmap: RegionMap, width: int = 860, height: int = 640) -> str:
    spec = rmap.spec
    a1, a2 = spec.axis1, spec.axis2
    cv = SvgCanvas(width, height)
    ax = cv.axes(70, 30, width - 240, height - 90, (a1.lo, a1.hi), (a2.lo, a2.hi))
    w1 = (a1.hi - a1.lo) / max(a1.steps - 1, 1)
    w2 = (a2.hi - a2.lo) / max(a2.steps - 1, 1)
    for cell in rmap.cells:
        ax.cell(cell.value1 - w1 / 2, cell.value2 - w2 / 2,
                cell.value1 + w1 / 2, cell.value2 + w2 / 2,
                REGION_COLORS[cell.region])
    ax.frame(f"{a2.name} vs {a1.name}")
    cv.text(70, height - 34, f"{a1.name}: {a1.lo:g} .. {a1.hi:g}")
    cv.text(10, 30, f"{a2.name}")
    present = sorted({c.region for c in rmap.cells})
    y = 40
    for region in present:
        name = REGION_LEGEND.get(region, "error")
        cv.rect(width - 155, y - 11, 14, 14, REGION_COLORS[region], stroke="#333333")
        cv.text(width - 135, y, f"{region}: {name}")
        y += 20
    return cv.render()
