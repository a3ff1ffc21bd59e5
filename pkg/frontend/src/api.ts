/** Typed REST client plus the dataset parser behind the hover probe.
 *
 * Every number the UI displays comes out of these calls; nothing here (or
 * anywhere client-side) recomputes pathloss.
 */

import type {
    EnvironmentDetail,
    EnvironmentSummary,
    RunRecord,
    SimulationRequest,
    TranscriptDoc,
} from "./types.js";

export class ApiError extends Error {
    constructor(readonly status: number, detail: string) {
        super(detail);
        this.name = "ApiError";
    }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function readJson<T>(resp: Response): Promise<T> {
    if (!resp.ok) {
        let detail = `HTTP ${resp.status}`;
        try {
            const doc = await resp.json();
            if (doc && typeof doc.detail === "string") {
                detail = doc.detail;
            }
        } catch {
            // non-JSON error body; keep the status text
        }
        throw new ApiError(resp.status, detail);
    }
    return resp.json() as Promise<T>;
}

export class ApiClient {
    constructor(
        private readonly base: string = "",
        private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
    ) {}

    private get(path: string): Promise<Response> {
        return this.fetchImpl(this.base + path);
    }

    async listEnvironments(): Promise<EnvironmentSummary[]> {
        const doc = await readJson<{ environments: EnvironmentSummary[] }>(
            await this.get("/api/environments"));
        return doc.environments;
    }

    async environmentDetail(location: string): Promise<EnvironmentDetail> {
        return readJson(await this.get(
            `/api/environments/${encodeURIComponent(location)}`));
    }

    async simulate(body: SimulationRequest): Promise<RunRecord> {
        return readJson(await this.fetchImpl(this.base + "/api/simulate", {
            method: "POST",
            headers: { "Content-Type": "application/json" },
            body: JSON.stringify(body),
        }));
    }

    async getRun(runId: string): Promise<RunRecord> {
        return readJson(await this.get(`/api/runs/${encodeURIComponent(runId)}`));
    }

    async listRuns(): Promise<RunRecord[]> {
        const doc = await readJson<{ runs: RunRecord[] }>(await this.get("/api/runs"));
        return doc.runs;
    }

    async transcript(episodeId: string): Promise<TranscriptDoc> {
        return readJson(await this.get(
            `/api/transcripts/${encodeURIComponent(episodeId)}`));
    }

    heatmapUrl(runId: string): string {
        return `${this.base}/api/runs/${encodeURIComponent(runId)}/heatmap.png`;
    }

    async dataset(runId: string): Promise<Dataset> {
        const resp = await this.get(`/api/runs/${encodeURIComponent(runId)}/dataset`);
        if (!resp.ok) {
            throw new ApiError(resp.status, `dataset fetch failed (${resp.status})`);
        }
        return parseDataset(await resp.text());
    }
}

/** Column names in the dataset header, in server order. */
export const DATASET_COLUMNS = [
    "rx_x", "rx_y", "rx_z", "los", "phi", "d3d", "ref", "bld", "height",
    "pathloss_db",
] as const;

export type DatasetColumn = (typeof DATASET_COLUMNS)[number];

/** Sentinel the server writes for cells no mechanism covers. */
export const UNCOVERED = -1.0;

export interface Dataset {
    nx: number;
    ny: number;
    /** Row-major per-cell values, row j * nx + column i. */
    columns: Record<DatasetColumn, Float64Array>;
}

/** Parse the text table from GET /api/runs/{id}/dataset.
 *
 * Grid shape is recovered from the distinct rx_x/rx_y counts; values are
 * kept verbatim so probe readouts match the stored artifact exactly.
 */
export function parseDataset(text: string): Dataset {
    const lines = text.trim().split("\n");
    const header = (lines[0] ?? "").split(/\s+/);
    if (header.join(" ") !== DATASET_COLUMNS.join(" ")) {
        throw new Error(`unexpected dataset columns: ${header.join(", ")}`);
    }
    const rows = lines.length - 1;
    const parsed = DATASET_COLUMNS.map(() => new Float64Array(rows));
    for (let r = 0; r < rows; r++) {
        const tokens = (lines[r + 1] ?? "").split(/\s+/);
        if (tokens.length !== DATASET_COLUMNS.length) {
            throw new Error(`row ${r + 1}: expected ${DATASET_COLUMNS.length} values`);
        }
        for (let c = 0; c < tokens.length; c++) {
            parsed[c]![r] = Number(tokens[c]);
        }
    }
    const nx = new Set(parsed[0]!).size;
    const ny = new Set(parsed[1]!).size;
    if (nx * ny !== rows) {
        throw new Error(`row count ${rows} does not match ${nx}x${ny}`);
    }
    const columns = {} as Record<DatasetColumn, Float64Array>;
    DATASET_COLUMNS.forEach((name, c) => {
        columns[name] = parsed[c]!;
    });
    return { nx, ny, columns };
}

export interface CellProbe {
    i: number;
    j: number;
    rxX: number;
    rxY: number;
    pathlossDb: number | null;  // null when the cell is uncovered
    d3d: number;
    phi: number;
    los: boolean;
    indoor: boolean;
}

export function probeCell(ds: Dataset, i: number, j: number): CellProbe {
    if (i < 0 || i >= ds.nx || j < 0 || j >= ds.ny) {
        throw new Error(`cell (${i}, ${j}) outside ${ds.nx}x${ds.ny} grid`);
    }
    const r = j * ds.nx + i;
    const pathloss = ds.columns.pathloss_db[r]!;
    return {
        i, j,
        rxX: ds.columns.rx_x[r]!,
        rxY: ds.columns.rx_y[r]!,
        pathlossDb: pathloss === UNCOVERED ? null : pathloss,
        d3d: ds.columns.d3d[r]!,
        phi: ds.columns.phi[r]!,
        los: ds.columns.los[r] === 1,
        indoor: ds.columns.bld[r] === 1,
    };
}
