/** World <-> canvas coordinate transforms and grid-cell lookup.
 *
 * World coordinates are meters with the origin at the lower-left bound and
 * y growing north; canvas pixels grow south, so the y axis flips here and
 * nowhere else.
 */

import type { Bounds } from "./types.js";

export interface Viewport {
    bounds: Bounds;
    width: number;   // canvas px
    height: number;  // canvas px
}

/** Uniform meters-per-pixel scale that fits the bounds into the canvas. */
export function scaleOf(vp: Viewport): number {
    const [[xmin, ymin], [xmax, ymax]] = vp.bounds;
    return Math.max((xmax - xmin) / vp.width, (ymax - ymin) / vp.height);
}

export function worldToCanvas(vp: Viewport, x: number, y: number): [number, number] {
    const [[xmin, ymin]] = vp.bounds;
    const s = scaleOf(vp);
    return [(x - xmin) / s, vp.height - (y - ymin) / s];
}

export function canvasToWorld(vp: Viewport, px: number, py: number): [number, number] {
    const [[xmin, ymin]] = vp.bounds;
    const s = scaleOf(vp);
    return [xmin + px * s, ymin + (vp.height - py) * s];
}

/** Grid cell (i, j) whose center the simulation sampled at world (x, y),
 * or null outside the bounds. i indexes x/columns, j indexes y/rows,
 * matching the dataset's row order. */
export function cellAt(bounds: Bounds, nx: number, ny: number,
                       x: number, y: number): [number, number] | null {
    const [[xmin, ymin], [xmax, ymax]] = bounds;
    if (x < xmin || x > xmax || y < ymin || y > ymax) {
        return null;
    }
    const i = Math.min(nx - 1, Math.floor(((x - xmin) / (xmax - xmin)) * nx));
    const j = Math.min(ny - 1, Math.floor(((y - ymin) / (ymax - ymin)) * ny));
    return [i, j];
}

/** Center of cell (i, j) in world meters. */
export function cellCenter(bounds: Bounds, nx: number, ny: number,
                           i: number, j: number): [number, number] {
    const [[xmin, ymin], [xmax, ymax]] = bounds;
    const dx = (xmax - xmin) / nx;
    const dy = (ymax - ymin) / ny;
    return [xmin + (i + 0.5) * dx, ymin + (j + 0.5) * dy];
}
