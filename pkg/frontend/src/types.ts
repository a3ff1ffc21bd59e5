/** Wire types mirroring the server's JSON shapes. */

/** [[xmin, ymin], [xmax, ymax]] in meters. */
export type Bounds = [[number, number], [number, number]];

export interface EnvironmentSummary {
    id: string;
    aliases: string[];
    bounds: Bounds;
    building_count: number;
    max_height: number;
}

export interface BuildingFootprint {
    id: number;
    height: number;
    vertices: [number, number][];
}

export interface EnvironmentDetail {
    name: string;
    bounds: Bounds;
    buildings: BuildingFootprint[];
}

export interface RadioConfig {
    frequency: number;
    tx_power_dbm: number;
    wall_permittivity: number;
    rx_height_default: number;
}

/** POST /api/simulate body; same shape the server stores as run metadata. */
export interface SimulationRequest {
    tx: [number, number, number];
    location: string;
    nx: number;
    ny: number;
    los: boolean;
    ref: boolean;
    gref: boolean;
    nlos: boolean;
    bel: boolean;
    rx_height: number | null;
    radio?: RadioConfig;
}

export type RunStatus = "running" | "done" | "failed";

export interface RunRecord {
    run_id: string;
    params: SimulationRequest;
    environment_name: string;
    environment_hash: string;
    created_at: string;
    status: RunStatus;
    version: string;
    files: { dataset: string | null; heatmap: string | null; metadata: string | null };
    error: string | null;
    links: { self: string; heatmap?: string; dataset?: string; metadata?: string; summary?: string };
}

export type TurnKind =
    | "thought"
    | "action"
    | "action_input"
    | "observation"
    | "final_answer"
    | "clarification_request";

export interface AgentTurn {
    kind: TurnKind;
    content: string;
    payload?: Record<string, unknown>;
}

/** Control events share the stream with turns; discriminated on `kind`. */
export interface EpisodeEndEvent {
    kind: "episode_end";
    episode_id: string;
    artifacts: { run_ids: string[]; files: string[] };
}

export interface StreamErrorEvent {
    kind: "error";
    content: string;
}

export type ChatEvent = AgentTurn | EpisodeEndEvent | StreamErrorEvent;

export interface TranscriptDoc {
    episode_id: string;
    prompt: string;
    backend: string;
    created_at: string;
    turns: AgentTurn[];
    artifacts: { run_ids: string[]; files: string[] };
}

export const TURN_KINDS: readonly TurnKind[] = [
    "thought", "action", "action_input", "observation",
    "final_answer", "clarification_request",
];

export function isAgentTurn(ev: ChatEvent): ev is AgentTurn {
    return (TURN_KINDS as readonly string[]).includes(ev.kind);
}
