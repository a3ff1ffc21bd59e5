import { describe, expect, it } from "vitest";

import { DATASET_COLUMNS, parseDataset } from "../src/api.js";
import type { Viewport } from "../src/geom.js";
import { cellColor, drawFootprints, drawTxMarker } from "../src/map.js";
import type { Canvas2D } from "../src/map.js";
import type { EnvironmentDetail } from "../src/types.js";

class RecordingCtx implements Canvas2D {
    fillStyle = "";
    strokeStyle = "";
    lineWidth = 0;
    calls: Array<[string, ...number[]]> = [];

    clearRect(...args: number[]) { this.calls.push(["clearRect", ...args]); }
    fillRect(...args: number[]) { this.calls.push(["fillRect", ...args]); }
    strokeRect(...args: number[]) { this.calls.push(["strokeRect", ...args]); }
    beginPath() { this.calls.push(["beginPath"]); }
    moveTo(...args: number[]) { this.calls.push(["moveTo", ...args]); }
    lineTo(...args: number[]) { this.calls.push(["lineTo", ...args]); }
    closePath() { this.calls.push(["closePath"]); }
    fill() { this.calls.push(["fill"]); }
    stroke() { this.calls.push(["stroke"]); }
    arc(...args: number[]) { this.calls.push(["arc", ...args]); }
}

const VP: Viewport = { bounds: [[0, 0], [100, 100]], width: 100, height: 100 };

describe("drawFootprints", () => {
    it("traces each footprint as a closed filled path in canvas space", () => {
        const env: EnvironmentDetail = {
            name: "t", bounds: [[0, 0], [100, 100]],
            buildings: [{ id: 1, height: 10,
                          vertices: [[10, 10], [30, 10], [30, 30], [10, 30]] }],
        };
        const ctx = new RecordingCtx();
        drawFootprints(ctx, VP, env);
        // y flips: world (10, 10) is canvas (10, 90)
        expect(ctx.calls).toEqual([
            ["beginPath"],
            ["moveTo", 10, 90],
            ["lineTo", 30, 90],
            ["lineTo", 30, 70],
            ["lineTo", 10, 70],
            ["closePath"],
            ["fill"],
            ["stroke"],
        ]);
    });
});

describe("drawTxMarker", () => {
    it("draws the marker at the transformed position", () => {
        const ctx = new RecordingCtx();
        drawTxMarker(ctx, VP, 50, 25);
        const arc = ctx.calls.find((c) => c[0] === "arc");
        expect(arc?.slice(1, 3)).toEqual([50, 75]);
    });
});

describe("cellColor", () => {
    const ds = parseDataset([
        DATASET_COLUMNS.join(" "),
        "25 25 1.5 1 0.1 10 0 0 1.5 80.0",
        "75 25 1.5 0 0.2 20 1 0 1.5 90.0",
        "25 75 1.5 0 0.3 30 0 1 9.0 100.0",
        "75 75 1.5 1 0.4 40 1 0 1.5 -1.0",
    ].join("\n") + "\n");

    it("tints only flagged cells on mask layers", () => {
        expect(cellColor(ds, "los_mask", 0)).not.toBeNull();
        expect(cellColor(ds, "los_mask", 1)).toBeNull();
        expect(cellColor(ds, "ref_mask", 1)).not.toBeNull();
        expect(cellColor(ds, "ref_mask", 0)).toBeNull();
        expect(cellColor(ds, "building_mask", 2)).not.toBeNull();
        expect(cellColor(ds, "building_mask", 3)).toBeNull();
    });

    it("shades d3d relative to the served maximum", () => {
        // farthest cell (40 m) is darkest; nearest (10 m) stays light
        expect(cellColor(ds, "d3d", 3)).toBe("rgba(40, 40, 40, 0.7)");
        expect(cellColor(ds, "d3d", 0)).toBe("rgba(190, 190, 190, 0.7)");
    });

    it("paints nothing for the pathloss layer (server image territory)", () => {
        for (let r = 0; r < 4; r++) {
            expect(cellColor(ds, "pathloss", r)).toBeNull();
        }
    });
});
