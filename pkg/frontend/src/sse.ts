/** Streaming client for POST /api/agent/chat.
 *
 * The endpoint answers with server-sent-event frames, one JSON document per
 * `data:` frame: transcript turns in episode order, then an `episode_end`
 * (or `error`) control event. Frames can arrive split or batched across
 * network chunks, so parsing is incremental.
 */

import type { ChatEvent } from "./types.js";

/** Incremental SSE frame decoder; feed() returns fully received events. */
export class SseParser {
    private buffer = "";

    feed(chunk: string): ChatEvent[] {
        this.buffer += chunk;
        const events: ChatEvent[] = [];
        let sep: number;
        while ((sep = this.buffer.indexOf("\n\n")) !== -1) {
            const frame = this.buffer.slice(0, sep);
            this.buffer = this.buffer.slice(sep + 2);
            const data = frame
                .split("\n")
                .filter((line) => line.startsWith("data:"))
                .map((line) => line.slice(5).trimStart())
                .join("\n");
            if (data) {
                events.push(JSON.parse(data) as ChatEvent);
            }
        }
        return events;
    }

    /** True when a partial frame is still buffered (stream cut mid-event). */
    hasPartial(): boolean {
        return this.buffer.trim().length > 0;
    }
}

export interface ChatHandlers {
    /** Called once per event, in server order. */
    onEvent: (ev: ChatEvent) => void;
    /** Stream closed after the server signalled the episode's end. */
    onDone?: () => void;
    /** Transport failed or the stream ended without an end-of-episode
     * event; the transcript received so far stays valid. */
    onDrop?: (reason: string) => void;
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export async function streamChat(
    base: string,
    prompt: string,
    backend: "scripted" | "remote",
    handlers: ChatHandlers,
    fetchImpl: FetchLike = (input, init) => fetch(input, init),
): Promise<void> {
    let ended = false;
    try {
        const resp = await fetchImpl(base + "/api/agent/chat", {
            method: "POST",
            headers: { "Content-Type": "application/json" },
            body: JSON.stringify({ prompt, backend }),
        });
        if (!resp.ok || !resp.body) {
            handlers.onDrop?.(`chat request failed (HTTP ${resp.status})`);
            return;
        }
        const reader = resp.body.getReader();
        const decoder = new TextDecoder();
        const parser = new SseParser();
        for (;;) {
            const { done, value } = await reader.read();
            const chunk = done
                ? decoder.decode()
                : decoder.decode(value, { stream: true });
            for (const ev of parser.feed(chunk)) {
                handlers.onEvent(ev);
                if (ev.kind === "episode_end" || ev.kind === "error") {
                    ended = true;
                }
            }
            if (done) {
                break;
            }
        }
    } catch (exc) {
        handlers.onDrop?.(exc instanceof Error ? exc.message : String(exc));
        return;
    }
    if (ended) {
        handlers.onDone?.();
    } else {
        handlers.onDrop?.("stream ended before the episode finished");
    }
}
