import { describe, expect, it } from "vitest";

import {
    ApiClient,
    ApiError,
    DATASET_COLUMNS,
    parseDataset,
    probeCell,
} from "../src/api.js";

/** 2x2 dataset in the server's text format: header then row-major cells.
 * Values are arbitrary but distinct so misindexing is visible; cell (1, 0)
 * is uncovered (sentinel -1.0) and cell (0, 1) is indoor. */
const DATASET_TEXT = [
    DATASET_COLUMNS.join(" "),
    "2.9 2.9 1.5 1 0.7853981633974483 21.2 0 0 1.5 83.2914770123",
    "8.7 2.9 1.5 0 1.1 24.8 1 0 1.5 -1.0",
    "2.9 8.7 1.5 0 2.2 30.1 0 1 12.0 131.25",
    "8.7 8.7 1.5 1 3.3 35.9 1 0 1.5 99.5",
].join("\n") + "\n";

describe("parseDataset", () => {
    it("recovers the grid shape and keeps values verbatim", () => {
        const ds = parseDataset(DATASET_TEXT);
        expect(ds.nx).toBe(2);
        expect(ds.ny).toBe(2);
        expect(Array.from(ds.columns.pathloss_db))
            .toEqual([83.2914770123, -1.0, 131.25, 99.5]);
        expect(Array.from(ds.columns.d3d)).toEqual([21.2, 24.8, 30.1, 35.9]);
    });

    it("rejects a foreign header", () => {
        expect(() => parseDataset("a b c\n1 2 3\n")).toThrow("unexpected dataset columns");
    });

    it("rejects ragged rows", () => {
        const broken = DATASET_COLUMNS.join(" ") + "\n1 2 3\n";
        expect(() => parseDataset(broken)).toThrow("expected 10 values");
    });
});

describe("probeCell", () => {
    const ds = parseDataset(DATASET_TEXT);

    it("reads the served values for a cell without recomputation", () => {
        const probe = probeCell(ds, 0, 0);
        // exactly the numbers from the text table
        expect(probe.pathlossDb).toBe(83.2914770123);
        expect(probe.d3d).toBe(21.2);
        expect(probe.phi).toBe(0.7853981633974483);
        expect(probe.rxX).toBe(2.9);
        expect(probe.los).toBe(true);
        expect(probe.indoor).toBe(false);
    });

    it("maps the uncovered sentinel to null", () => {
        expect(probeCell(ds, 1, 0).pathlossDb).toBeNull();
    });

    it("flags indoor cells", () => {
        const probe = probeCell(ds, 0, 1);
        expect(probe.indoor).toBe(true);
        expect(probe.pathlossDb).toBe(131.25);
    });

    it("rejects out-of-grid indices", () => {
        expect(() => probeCell(ds, 2, 0)).toThrow("outside");
    });
});

type Recorded = { url: string; init?: RequestInit };

function fakeFetch(responses: Response[], log: Recorded[]) {
    return async (url: string, init?: RequestInit): Promise<Response> => {
        log.push({ url, init });
        const next = responses.shift();
        if (!next) {
            throw new Error("unexpected request");
        }
        return next;
    };
}

function jsonResponse(doc: unknown, status = 200): Response {
    return new Response(JSON.stringify(doc), {
        status,
        headers: { "Content-Type": "application/json" },
    });
}

describe("ApiClient", () => {
    it("unwraps the environments listing", async () => {
        const log: Recorded[] = [];
        const api = new ApiClient("", fakeFetch([jsonResponse({
            environments: [{ id: "synthetic01", aliases: ["munich01"],
                             bounds: [[0, 0], [290, 290]],
                             building_count: 25, max_height: 13.8 }],
        })], log));
        const envs = await api.listEnvironments();
        expect(envs).toHaveLength(1);
        expect(envs[0]!.id).toBe("synthetic01");
        expect(log[0]!.url).toBe("/api/environments");
    });

    it("posts simulation requests as JSON", async () => {
        const log: Recorded[] = [];
        const api = new ApiClient("", fakeFetch([jsonResponse({ run_id: "r1", status: "done" })], log));
        const body = {
            tx: [100, 100, 15] as [number, number, number],
            location: "munich01", nx: 50, ny: 50,
            los: true, ref: true, gref: true, nlos: true, bel: true,
            rx_height: null,
        };
        await api.simulate(body);
        expect(log[0]!.url).toBe("/api/simulate");
        expect(log[0]!.init?.method).toBe("POST");
        expect(JSON.parse(String(log[0]!.init?.body))).toEqual(body);
        expect((log[0]!.init?.headers as Record<string, string>)["Content-Type"])
            .toBe("application/json");
    });

    it("surfaces server validation details as ApiError", async () => {
        const api = new ApiClient("", fakeFetch([jsonResponse(
            { detail: "grid must be at least 2x2, got 1x50" }, 400)], []));
        const err = await api.simulate({} as never).catch((e: unknown) => e);
        expect(err).toBeInstanceOf(ApiError);
        expect((err as ApiError).status).toBe(400);
        expect((err as ApiError).message).toContain("at least 2x2");
    });

    it("builds heatmap URLs under the configured base", () => {
        const api = new ApiClient("http://localhost:8000");
        expect(api.heatmapUrl("abc123"))
            .toBe("http://localhost:8000/api/runs/abc123/heatmap.png");
    });

    it("fetches and parses datasets", async () => {
        const log: Recorded[] = [];
        const api = new ApiClient("", fakeFetch([new Response(DATASET_TEXT)], log));
        const ds = await api.dataset("r1");
        expect(ds.nx).toBe(2);
        expect(log[0]!.url).toBe("/api/runs/r1/dataset");
    });
});
