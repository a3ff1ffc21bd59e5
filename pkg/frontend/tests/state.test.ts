import { describe, expect, it } from "vitest";

import { inputPrompt } from "../src/chat.js";
import {
    Store,
    applyChatEvent,
    applyStreamDrop,
    initialState,
    placeTxAt,
    replayTranscript,
    selectEnvironment,
    setLayer,
    startEpisode,
} from "../src/state.js";
import type { SessionState } from "../src/state.js";
import type { ChatEvent, EnvironmentDetail, TranscriptDoc } from "../src/types.js";

const ENV: EnvironmentDetail = {
    name: "synthetic01",
    bounds: [[0, 0], [290, 290]],
    buildings: [{ id: 1, height: 12, vertices: [[15, 15], [55, 15], [55, 55], [15, 55]] }],
};

const EPISODE: ChatEvent[] = [
    { kind: "thought", content: "The user requests a simulation." },
    { kind: "action", content: "simulate_radio_environment" },
    { kind: "action_input", content: "tx_x = 100, tx_y = 100, tx_z = 15" },
    { kind: "observation", content: "Simulation completed successfully. run_id = r42." },
    { kind: "final_answer", content: "Done.", payload: { run_id: "r42" } },
    { kind: "episode_end", episode_id: "ep7", artifacts: { run_ids: ["r42"], files: [] } },
];

function play(events: ChatEvent[], from: SessionState = startEpisode(initialState())) {
    return events.reduce(applyChatEvent, from);
}

describe("transcript streaming", () => {
    it("mirrors server turn order and count", () => {
        const state = play(EPISODE);
        expect(state.transcript.map((t) => t.kind)).toEqual([
            "thought", "action", "action_input", "observation", "final_answer",
        ]);
        expect(state.transcript[2]!.content).toBe("tx_x = 100, tx_y = 100, tx_z = 15");
    });

    it("links the produced run into the workspace at episode end", () => {
        const state = play(EPISODE);
        expect(state.episodeId).toBe("ep7");
        expect(state.activeRunId).toBe("r42");
        expect(state.chatStatus).toBe("idle");
    });

    it("keeps the previous run when an episode produced none", () => {
        const seeded = { ...startEpisode(initialState()), activeRunId: "old" };
        const state = play([
            { kind: "final_answer", content: "Nothing to do." },
            { kind: "episode_end", episode_id: "ep8", artifacts: { run_ids: [], files: [] } },
        ], seeded);
        expect(state.activeRunId).toBe("old");
    });

    it("starting a new episode clears the panel but not the map", () => {
        const prev = { ...play(EPISODE), layer: "los_mask" as const };
        const state = startEpisode(prev);
        expect(state.transcript).toEqual([]);
        expect(state.chatStatus).toBe("streaming");
        expect(state.activeRunId).toBe("r42");
        expect(state.layer).toBe("los_mask");
    });
});

describe("clarification flow", () => {
    const QUESTION = "Could you provide the transmitter coordinates (x, y, z)?";

    it("re-opens the input with the question quoted", () => {
        const state = play([
            { kind: "clarification_request", content: QUESTION },
            { kind: "episode_end", episode_id: "ep9", artifacts: { run_ids: [], files: [] } },
        ]);
        expect(state.chatStatus).toBe("awaiting_clarification");
        expect(state.clarificationQuestion).toBe(QUESTION);
        expect(inputPrompt(state)).toBe(`Clarify: ${QUESTION}`);
    });

    it("uses the idle placeholder otherwise", () => {
        expect(inputPrompt(initialState())).toBe("Describe a simulation…");
    });
});

describe("stream drop and replay", () => {
    it("preserves the transcript and posts a reconnect notice", () => {
        const mid = play(EPISODE.slice(0, 3));
        const state = applyStreamDrop(mid, "connection reset");
        expect(state.chatStatus).toBe("dropped");
        expect(state.transcript).toHaveLength(3);
        expect(state.notice).toContain("transcript preserved");
    });

    it("replaying the persisted episode is idempotent", () => {
        const doc: TranscriptDoc = {
            episode_id: "ep7",
            prompt: "simulate munich01",
            backend: "scripted",
            created_at: "2026-01-01T00:00:00+00:00",
            turns: EPISODE.slice(0, 5) as TranscriptDoc["turns"],
            artifacts: { run_ids: ["r42"], files: [] },
        };
        const dropped = applyStreamDrop(play(EPISODE.slice(0, 3)), "reset");
        const once = replayTranscript(dropped, doc);
        const twice = replayTranscript(once, doc);
        expect(once).toEqual(twice);
        expect(once.transcript).toHaveLength(5);
        expect(once.episodeId).toBe("ep7");
        expect(once.activeRunId).toBe("r42");
        expect(once.chatStatus).toBe("idle");
    });

    it("replay of a clarification episode re-arms the input", () => {
        const doc: TranscriptDoc = {
            episode_id: "ep9",
            prompt: "simulate",
            backend: "scripted",
            created_at: "2026-01-01T00:00:00+00:00",
            turns: [{ kind: "clarification_request", content: "Which environment?" }],
            artifacts: { run_ids: [], files: [] },
        };
        const state = replayTranscript(initialState(), doc);
        expect(state.chatStatus).toBe("awaiting_clarification");
        expect(state.clarificationQuestion).toBe("Which environment?");
    });
});

describe("map workspace state", () => {
    it("selecting an environment resets the tx and active run", () => {
        let state = selectEnvironment(initialState(), ENV);
        state = placeTxAt(state, 100, 100);
        state = { ...state, activeRunId: "r1" };

        const other: EnvironmentDetail = { ...ENV, name: "synthetic02" };
        state = selectEnvironment(state, other);
        expect(state.draft.location).toBe("synthetic02");
        expect(state.draft.txX).toBeNull();
        expect(state.activeRunId).toBeNull();
    });

    it("placing the tx keeps everything else", () => {
        const base = selectEnvironment(initialState(), ENV);
        const state = placeTxAt(base, 100.5, 42.25);
        expect(state.draft.txX).toBe(100.5);
        expect(state.draft.txY).toBe(42.25);
        expect(state.draft.nx).toBe(50);
        expect(state.environment).toBe(ENV);
    });

    it("layer switching is independent of the draft", () => {
        const state = setLayer(initialState(), "building_mask");
        expect(state.layer).toBe("building_mask");
        expect(state.draft).toEqual(initialState().draft);
    });
});

describe("Store", () => {
    it("notifies subscribers after each transition", () => {
        const store = new Store();
        const seen: string[] = [];
        const unsubscribe = store.subscribe((s) => seen.push(s.layer));
        store.apply((s) => setLayer(s, "d3d"));
        store.apply((s) => setLayer(s, "pathloss"));
        unsubscribe();
        store.apply((s) => setLayer(s, "los_mask"));
        expect(seen).toEqual(["d3d", "pathloss"]);
        expect(store.get().layer).toBe("los_mask");
    });
});
