/** Map workspace drawing: footprints, dataset feature layers, tx marker.
 *
 * Functions take the narrow Canvas2D slice they use, so tests can drive
 * them with a recording fake. The pathloss layer itself is never painted
 * here: that image comes rendered from the server.
 */

import type { Dataset } from "./api.js";
import { UNCOVERED } from "./api.js";
import type { Viewport } from "./geom.js";
import { cellCenter, scaleOf, worldToCanvas } from "./geom.js";
import type { LayerName } from "./state.js";
import type { EnvironmentDetail } from "./types.js";

export interface Canvas2D {
    fillStyle: string | CanvasGradient | CanvasPattern;
    strokeStyle: string | CanvasGradient | CanvasPattern;
    lineWidth: number;
    clearRect(x: number, y: number, w: number, h: number): void;
    fillRect(x: number, y: number, w: number, h: number): void;
    strokeRect(x: number, y: number, w: number, h: number): void;
    beginPath(): void;
    moveTo(x: number, y: number): void;
    lineTo(x: number, y: number): void;
    closePath(): void;
    fill(): void;
    stroke(): void;
    arc(x: number, y: number, r: number, a0: number, a1: number): void;
}

export const FOOTPRINT_FILL = "#c8cdd4";
export const FOOTPRINT_STROKE = "#8a919b";

export function drawFootprints(ctx: Canvas2D, vp: Viewport,
                               env: EnvironmentDetail): void {
    ctx.fillStyle = FOOTPRINT_FILL;
    ctx.strokeStyle = FOOTPRINT_STROKE;
    ctx.lineWidth = 1;
    for (const b of env.buildings) {
        ctx.beginPath();
        b.vertices.forEach(([x, y], idx) => {
            const [px, py] = worldToCanvas(vp, x, y);
            if (idx === 0) {
                ctx.moveTo(px, py);
            } else {
                ctx.lineTo(px, py);
            }
        });
        ctx.closePath();
        ctx.fill();
        ctx.stroke();
    }
}

/** Cell fill for the feature layers; null cells are skipped.
 * Mask layers tint where the server flagged the cell; d3d shades by the
 * served distance relative to the grid's own maximum (display scaling of
 * server values, not a recomputation). */
export function cellColor(ds: Dataset, layer: LayerName, r: number): string | null {
    switch (layer) {
        case "los_mask":
            return ds.columns.los[r] === 1 ? "rgba(46, 160, 67, 0.55)" : null;
        case "ref_mask":
            return ds.columns.ref[r] === 1 ? "rgba(31, 111, 235, 0.55)" : null;
        case "building_mask":
            return ds.columns.bld[r] === 1 ? "rgba(87, 96, 106, 0.85)" : null;
        case "d3d": {
            let max = 0;
            for (const v of ds.columns.d3d) {
                if (v > max) {
                    max = v;
                }
            }
            const t = max > 0 ? ds.columns.d3d[r]! / max : 0;
            const shade = Math.round(240 - 200 * t);
            return `rgba(${shade}, ${shade}, ${shade}, 0.7)`;
        }
        case "pathloss":
            return null;
    }
}

export function drawFeatureLayer(ctx: Canvas2D, vp: Viewport, ds: Dataset,
                                 layer: LayerName): void {
    if (layer === "pathloss") {
        return;
    }
    const s = scaleOf(vp);
    const [[xmin, ymin], [xmax, ymax]] = vp.bounds;
    const cw = (xmax - xmin) / ds.nx / s;
    const ch = (ymax - ymin) / ds.ny / s;
    for (let j = 0; j < ds.ny; j++) {
        for (let i = 0; i < ds.nx; i++) {
            const color = cellColor(ds, layer, j * ds.nx + i);
            if (color === null) {
                continue;
            }
            const [cx, cy] = cellCenter(vp.bounds, ds.nx, ds.ny, i, j);
            const [px, py] = worldToCanvas(vp, cx, cy);
            ctx.fillStyle = color;
            ctx.fillRect(px - cw / 2, py - ch / 2, cw, ch);
        }
    }
}

export function drawTxMarker(ctx: Canvas2D, vp: Viewport,
                             x: number, y: number): void {
    const [px, py] = worldToCanvas(vp, x, y);
    ctx.fillStyle = "#d33";
    ctx.strokeStyle = "#fff";
    ctx.lineWidth = 2;
    ctx.beginPath();
    ctx.arc(px, py, 6, 0, Math.PI * 2);
    ctx.fill();
    ctx.stroke();
}

export { UNCOVERED };
