/** Chat panel rendering: one bubble per transcript turn, kinds styled
 * distinctly, final answers linking the runs they produced. Pure
 * DOM-building from state; event wiring lives in main.ts. */

import type { SessionState } from "./state.js";
import type { AgentTurn, TurnKind } from "./types.js";

export const TURN_LABELS: Record<TurnKind, string> = {
    thought: "Thought",
    action: "Action",
    action_input: "Action Input",
    observation: "Observation",
    final_answer: "Final Answer",
    clarification_request: "Clarification",
};

function runIdOf(turn: AgentTurn): string | null {
    const payload = turn.payload;
    if (payload && typeof payload["run_id"] === "string") {
        return payload["run_id"];
    }
    return null;
}

export function renderTurn(doc: Document, turn: AgentTurn,
                           onOpenRun: (runId: string) => void): HTMLElement {
    const li = doc.createElement("li");
    li.className = `turn turn-${turn.kind}`;

    const label = doc.createElement("span");
    label.className = "turn-label";
    label.textContent = TURN_LABELS[turn.kind];
    li.appendChild(label);

    const body = doc.createElement("span");
    body.className = "turn-content";
    body.textContent = turn.content;
    li.appendChild(body);

    const runId = runIdOf(turn);
    if (runId !== null) {
        const link = doc.createElement("a");
        link.href = "#";
        link.className = "turn-run-link";
        link.textContent = `open run ${runId.slice(0, 8)}`;
        link.addEventListener("click", (ev) => {
            ev.preventDefault();
            onOpenRun(runId);
        });
        li.appendChild(link);
    }
    return li;
}

export function renderTranscript(doc: Document, list: HTMLElement,
                                 state: SessionState,
                                 onOpenRun: (runId: string) => void): void {
    list.textContent = "";
    for (const turn of state.transcript) {
        list.appendChild(renderTurn(doc, turn, onOpenRun));
    }
    if (state.chatStatus === "streaming") {
        const li = doc.createElement("li");
        li.className = "turn turn-pending";
        li.textContent = "…";
        list.appendChild(li);
    }
}

/** Input placeholder text; a pending clarification quotes the question. */
export function inputPrompt(state: SessionState): string {
    if (state.chatStatus === "awaiting_clarification" && state.clarificationQuestion) {
        return `Clarify: ${state.clarificationQuestion}`;
    }
    return "Describe a simulation…";
}
