/** Session state and its transitions.
 *
 * All transitions are pure functions over SessionState so the interaction
 * rules (turn ordering, clarification flow, run linking, drop recovery) are
 * testable without a DOM. The Store wraps them with change notification.
 */

import type {
    AgentTurn,
    ChatEvent,
    EnvironmentDetail,
    EnvironmentSummary,
    TranscriptDoc,
} from "./types.js";
import { isAgentTurn } from "./types.js";
import type { SimulationDraft } from "./params.js";
import { emptyDraft, placeTx } from "./params.js";

export type LayerName = "pathloss" | "los_mask" | "ref_mask" | "building_mask" | "d3d";

export const LAYERS: readonly LayerName[] = [
    "pathloss", "los_mask", "ref_mask", "building_mask", "d3d",
];

export type ChatStatus = "idle" | "streaming" | "awaiting_clarification" | "dropped";

export interface SessionState {
    environments: EnvironmentSummary[];
    environment: EnvironmentDetail | null;
    draft: SimulationDraft;
    activeRunId: string | null;
    layer: LayerName;
    transcript: AgentTurn[];
    episodeId: string | null;
    chatStatus: ChatStatus;
    /** Set while a clarification answer is expected; quoted in the input. */
    clarificationQuestion: string | null;
    /** One-line status banner (stream drops, background errors). */
    notice: string | null;
}

export function initialState(): SessionState {
    return {
        environments: [],
        environment: null,
        draft: emptyDraft(),
        activeRunId: null,
        layer: "pathloss",
        transcript: [],
        episodeId: null,
        chatStatus: "idle",
        clarificationQuestion: null,
        notice: null,
    };
}

export function selectEnvironment(state: SessionState,
                                  env: EnvironmentDetail): SessionState {
    // a new scene invalidates the placed tx and any displayed run
    return {
        ...state,
        environment: env,
        draft: { ...state.draft, location: env.name, txX: null, txY: null },
        activeRunId: null,
    };
}

export function placeTxAt(state: SessionState, x: number, y: number): SessionState {
    return { ...state, draft: placeTx(state.draft, x, y) };
}

export function setLayer(state: SessionState, layer: LayerName): SessionState {
    return { ...state, layer };
}

export function setActiveRun(state: SessionState, runId: string | null): SessionState {
    return { ...state, activeRunId: runId };
}

export function startEpisode(state: SessionState): SessionState {
    return {
        ...state,
        transcript: [],
        episodeId: null,
        chatStatus: "streaming",
        clarificationQuestion: null,
        notice: null,
    };
}

/** Fold one streamed event into the session. Turns append in arrival order
 * so the rendered transcript always mirrors the server's. */
export function applyChatEvent(state: SessionState, ev: ChatEvent): SessionState {
    if (isAgentTurn(ev)) {
        const next: SessionState = { ...state, transcript: [...state.transcript, ev] };
        if (ev.kind === "clarification_request") {
            next.chatStatus = "awaiting_clarification";
            next.clarificationQuestion = ev.content;
        }
        return next;
    }
    if (ev.kind === "episode_end") {
        const runIds = ev.artifacts.run_ids;
        const lastRun = runIds.length ? runIds[runIds.length - 1]! : null;
        return {
            ...state,
            episodeId: ev.episode_id,
            // the answer links its run into the map workspace
            activeRunId: lastRun ?? state.activeRunId,
            chatStatus: state.chatStatus === "awaiting_clarification"
                ? "awaiting_clarification" : "idle",
        };
    }
    return { ...state, chatStatus: "idle", notice: ev.content };
}

/** Transport drop: keep everything received, surface a reconnect notice. */
export function applyStreamDrop(state: SessionState, reason: string): SessionState {
    return {
        ...state,
        chatStatus: "dropped",
        notice: `stream interrupted (${reason}); transcript preserved`,
    };
}

/** Replace the local transcript with the persisted episode. Replay is
 * idempotent: applying the same document twice changes nothing. */
export function replayTranscript(state: SessionState, doc: TranscriptDoc): SessionState {
    const last = doc.turns[doc.turns.length - 1] ?? null;
    const awaiting = last !== null && last.kind === "clarification_request";
    const runIds = doc.artifacts.run_ids;
    return {
        ...state,
        transcript: [...doc.turns],
        episodeId: doc.episode_id,
        chatStatus: awaiting ? "awaiting_clarification" : "idle",
        clarificationQuestion: awaiting ? last.content : null,
        activeRunId: runIds.length ? runIds[runIds.length - 1]! : state.activeRunId,
        notice: null,
    };
}

type Listener = (state: SessionState) => void;

/** Minimal observable wrapper used by the DOM layer. */
export class Store {
    private state: SessionState;
    private listeners: Listener[] = [];

    constructor(state: SessionState = initialState()) {
        this.state = state;
    }

    get(): SessionState {
        return this.state;
    }

    apply(transition: (state: SessionState) => SessionState): void {
        this.state = transition(this.state);
        for (const fn of this.listeners) {
            fn(this.state);
        }
    }

    subscribe(fn: Listener): () => void {
        this.listeners.push(fn);
        return () => {
            this.listeners = this.listeners.filter((f) => f !== fn);
        };
    }
}
