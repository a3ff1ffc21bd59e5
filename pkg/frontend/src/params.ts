/** Simulation draft editing and client-side validation.
 *
 * The checks mirror the server's rules exactly (grid at least 2x2, tx
 * inside the environment bounds, receiver height positive) so a request
 * that passes here is never rejected by POST /api/simulate for shape
 * reasons; server messages still win when they disagree.
 */

import type { Bounds, SimulationRequest } from "./types.js";

export interface SimulationDraft {
    txX: number | null;
    txY: number | null;
    txZ: number;
    location: string | null;
    nx: number;
    ny: number;
    los: boolean;
    ref: boolean;
    gref: boolean;
    nlos: boolean;
    bel: boolean;
    rxHeight: number | null;
}

export const DEFAULT_TX_HEIGHT = 15;
export const DEFAULT_GRID = 50;

export function emptyDraft(): SimulationDraft {
    return {
        txX: null, txY: null, txZ: DEFAULT_TX_HEIGHT,
        location: null, nx: DEFAULT_GRID, ny: DEFAULT_GRID,
        los: true, ref: true, gref: true, nlos: true, bel: true,
        rxHeight: null,
    };
}

export function placeTx(draft: SimulationDraft, x: number, y: number): SimulationDraft {
    return { ...draft, txX: x, txY: y };
}

export type DraftErrors = Partial<Record<"tx" | "location" | "grid" | "rxHeight", string>>;

export function validateDraft(draft: SimulationDraft, bounds: Bounds | null): DraftErrors {
    const errors: DraftErrors = {};
    if (draft.location === null || draft.location === "") {
        errors.location = "pick an environment";
    }
    if (draft.txX === null || draft.txY === null) {
        errors.tx = "click the map to place the transmitter";
    } else if (bounds) {
        const [[xmin, ymin], [xmax, ymax]] = bounds;
        if (draft.txX < xmin || draft.txX > xmax || draft.txY < ymin || draft.txY > ymax) {
            errors.tx = `tx (${draft.txX}, ${draft.txY}) outside environment bounds`;
        }
    }
    if (!Number.isInteger(draft.nx) || !Number.isInteger(draft.ny)
        || draft.nx < 2 || draft.ny < 2) {
        errors.grid = `grid must be at least 2x2, got ${draft.nx}x${draft.ny}`;
    }
    if (draft.rxHeight !== null && draft.rxHeight <= 0) {
        errors.rxHeight = "rx_height must be > 0";
    }
    return errors;
}

export function isReady(draft: SimulationDraft, bounds: Bounds | null): boolean {
    return Object.keys(validateDraft(draft, bounds)).length === 0;
}

/** Build the POST /api/simulate body from a valid draft. */
export function buildRequest(draft: SimulationDraft): SimulationRequest {
    if (draft.txX === null || draft.txY === null || draft.location === null) {
        throw new Error("draft is incomplete");
    }
    return {
        tx: [draft.txX, draft.txY, draft.txZ],
        location: draft.location,
        nx: draft.nx,
        ny: draft.ny,
        los: draft.los,
        ref: draft.ref,
        gref: draft.gref,
        nlos: draft.nlos,
        bel: draft.bel,
        rx_height: draft.rxHeight,
    };
}
