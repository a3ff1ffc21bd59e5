/** Application bootstrap: builds the two-panel layout (map workspace +
 * chat), binds DOM events to state transitions, and keeps the canvas,
 * form, and transcript in sync with the store. */

import { ApiClient, probeCell } from "./api.js";
import type { Dataset } from "./api.js";
import { inputPrompt, renderTranscript } from "./chat.js";
import { canvasToWorld, cellAt } from "./geom.js";
import type { Viewport } from "./geom.js";
import { drawFeatureLayer, drawFootprints, drawTxMarker } from "./map.js";
import { buildRequest, validateDraft } from "./params.js";
import {
    LAYERS,
    Store,
    applyChatEvent,
    applyStreamDrop,
    initialState,
    placeTxAt,
    selectEnvironment,
    setActiveRun,
    setLayer,
    startEpisode,
} from "./state.js";
import type { LayerName } from "./state.js";
import { streamChat } from "./sse.js";

const api = new ApiClient("");
const store = new Store(initialState());

let dataset: Dataset | null = null;
let datasetRunId: string | null = null;

function el<T extends HTMLElement>(id: string): T {
    const node = document.getElementById(id);
    if (!node) {
        throw new Error(`missing element #${id}`);
    }
    return node as T;
}

function viewport(): Viewport | null {
    const state = store.get();
    if (!state.environment) {
        return null;
    }
    const canvas = el<HTMLCanvasElement>("map-canvas");
    return { bounds: state.environment.bounds, width: canvas.width, height: canvas.height };
}

function redrawMap(): void {
    const state = store.get();
    const canvas = el<HTMLCanvasElement>("map-canvas");
    const ctx = canvas.getContext("2d");
    const vp = viewport();
    if (!ctx || !vp || !state.environment) {
        return;
    }
    ctx.clearRect(0, 0, canvas.width, canvas.height);
    drawFootprints(ctx, vp, state.environment);
    if (dataset && datasetRunId === state.activeRunId && state.layer !== "pathloss") {
        drawFeatureLayer(ctx, vp, dataset, state.layer);
    }
    if (state.draft.txX !== null && state.draft.txY !== null) {
        drawTxMarker(ctx, vp, state.draft.txX, state.draft.txY);
    }
}

function renderForm(): void {
    const state = store.get();
    const errors = validateDraft(state.draft, state.environment?.bounds ?? null);
    el("tx-readout").textContent =
        state.draft.txX !== null && state.draft.txY !== null
            ? `tx = (${state.draft.txX.toFixed(1)}, ${state.draft.txY.toFixed(1)}, ${state.draft.txZ})`
            : "click the map to place the transmitter";
    el("form-errors").textContent = Object.values(errors).join("; ");
    el<HTMLButtonElement>("simulate-btn").disabled = Object.keys(errors).length > 0;
    el("notice").textContent = state.notice ?? "";
}

function renderHeatmap(): void {
    const state = store.get();
    const img = el<HTMLImageElement>("heatmap-img");
    const caption = el("heatmap-caption");
    if (state.activeRunId) {
        img.src = api.heatmapUrl(state.activeRunId);
        img.hidden = false;
        caption.textContent = `run ${state.activeRunId.slice(0, 8)}`;
    } else {
        img.hidden = true;
        caption.textContent = "no run selected";
    }
}

function renderChat(): void {
    const state = store.get();
    renderTranscript(document, el("transcript"), state, openRun);
    const input = el<HTMLInputElement>("chat-input");
    input.placeholder = inputPrompt(state);
    if (state.chatStatus === "awaiting_clarification") {
        input.focus();
    }
}

async function loadDatasetFor(runId: string): Promise<void> {
    try {
        dataset = await api.dataset(runId);
        datasetRunId = runId;
    } catch {
        dataset = null;
        datasetRunId = null;
    }
    redrawMap();
}

function openRun(runId: string): void {
    store.apply((s) => setActiveRun(s, runId));
    void loadDatasetFor(runId);
}

async function pollRun(runId: string): Promise<void> {
    for (;;) {
        const rec = await api.getRun(runId);
        if (rec.status === "done") {
            openRun(runId);
            return;
        }
        if (rec.status === "failed") {
            store.apply((s) => ({ ...s, notice: rec.error ?? "simulation failed" }));
            return;
        }
        await new Promise((resolve) => setTimeout(resolve, 500));
    }
}

async function onSimulateClick(): Promise<void> {
    const state = store.get();
    try {
        const rec = await api.simulate(buildRequest(state.draft));
        if (rec.status === "done") {
            openRun(rec.run_id);
        } else {
            store.apply((s) => ({ ...s, notice: `run ${rec.run_id.slice(0, 8)} queued…` }));
            await pollRun(rec.run_id);
        }
    } catch (exc) {
        // server-side validation message, shown on the form
        store.apply((s) => ({
            ...s,
            notice: exc instanceof Error ? exc.message : String(exc),
        }));
    }
}

function onMapHover(evPx: number, evPy: number): void {
    const state = store.get();
    const vp = viewport();
    const probeBox = el("probe");
    if (!vp || !dataset || datasetRunId !== state.activeRunId) {
        probeBox.textContent = "";
        return;
    }
    const [wx, wy] = canvasToWorld(vp, evPx, evPy);
    const cell = cellAt(vp.bounds, dataset.nx, dataset.ny, wx, wy);
    if (!cell) {
        probeBox.textContent = "";
        return;
    }
    const probe = probeCell(dataset, cell[0], cell[1]);
    const pl = probe.pathlossDb === null ? "uncovered" : `${probe.pathlossDb.toFixed(1)} dB`;
    probeBox.textContent =
        `(${probe.rxX.toFixed(1)}, ${probe.rxY.toFixed(1)})  ` +
        `pathloss ${pl}  d3d ${probe.d3d.toFixed(1)} m  phi ${probe.phi.toFixed(3)} rad`;
}

async function sendPrompt(): Promise<void> {
    const input = el<HTMLInputElement>("chat-input");
    const prompt = input.value.trim();
    if (!prompt) {
        return;
    }
    input.value = "";
    const backend = el<HTMLSelectElement>("backend-select").value === "remote"
        ? "remote" : "scripted";
    store.apply(startEpisode);
    await streamChat("", prompt, backend, {
        onEvent: (ev) => store.apply((s) => applyChatEvent(s, ev)),
        onDrop: (reason) => store.apply((s) => applyStreamDrop(s, reason)),
    });
    const runId = store.get().activeRunId;
    if (runId) {
        void loadDatasetFor(runId);
    }
}

async function boot(): Promise<void> {
    const envSelect = el<HTMLSelectElement>("env-select");
    const environments = await api.listEnvironments();
    store.apply((s) => ({ ...s, environments }));
    envSelect.textContent = "";
    for (const env of environments) {
        const opt = document.createElement("option");
        opt.value = env.id;
        opt.textContent = env.aliases.length ? `${env.id} (${env.aliases.join(", ")})` : env.id;
        envSelect.appendChild(opt);
    }

    const layerSelect = el<HTMLSelectElement>("layer-select");
    for (const layer of LAYERS) {
        const opt = document.createElement("option");
        opt.value = layer;
        opt.textContent = layer;
        layerSelect.appendChild(opt);
    }

    async function pickEnvironment(id: string): Promise<void> {
        const detail = await api.environmentDetail(id);
        dataset = null;
        datasetRunId = null;
        store.apply((s) => selectEnvironment(s, detail));
    }

    envSelect.addEventListener("change", () => void pickEnvironment(envSelect.value));
    layerSelect.addEventListener("change", () =>
        store.apply((s) => setLayer(s, layerSelect.value as LayerName)));

    const canvas = el<HTMLCanvasElement>("map-canvas");
    canvas.addEventListener("click", (ev) => {
        const vp = viewport();
        if (!vp) {
            return;
        }
        const rect = canvas.getBoundingClientRect();
        const [x, y] = canvasToWorld(vp, ev.clientX - rect.left, ev.clientY - rect.top);
        store.apply((s) => placeTxAt(s, Math.round(x * 10) / 10, Math.round(y * 10) / 10));
    });
    canvas.addEventListener("mousemove", (ev) => {
        const rect = canvas.getBoundingClientRect();
        onMapHover(ev.clientX - rect.left, ev.clientY - rect.top);
    });

    for (const flag of ["los", "ref", "gref", "nlos", "bel"] as const) {
        const box = el<HTMLInputElement>(`flag-${flag}`);
        box.addEventListener("change", () =>
            store.apply((s) => ({ ...s, draft: { ...s.draft, [flag]: box.checked } })));
    }
    const txZ = el<HTMLInputElement>("tx-z");
    txZ.addEventListener("change", () =>
        store.apply((s) => ({ ...s, draft: { ...s.draft, txZ: Number(txZ.value) } })));
    for (const axis of ["nx", "ny"] as const) {
        const box = el<HTMLInputElement>(`grid-${axis}`);
        box.addEventListener("change", () =>
            store.apply((s) => ({ ...s, draft: { ...s.draft, [axis]: Number(box.value) } })));
    }

    el<HTMLButtonElement>("simulate-btn").addEventListener("click", () => void onSimulateClick());
    el<HTMLButtonElement>("chat-send").addEventListener("click", () => void sendPrompt());
    el<HTMLInputElement>("chat-input").addEventListener("keydown", (ev) => {
        if (ev.key === "Enter") {
            void sendPrompt();
        }
    });

    store.subscribe(() => {
        redrawMap();
        renderForm();
        renderHeatmap();
        renderChat();
    });

    if (environments.length) {
        await pickEnvironment(environments[0]!.id);
    }
}

void boot();
