import { describe, expect, it, vi } from "vitest";

import { ClientState, SessionClient, SocketLike } from "../src/client.js";
import { Frame } from "../src/wire.js";

class FakeSocket implements SocketLike {
    onopen: (() => void) | null = null;
    onmessage: ((ev: { data: unknown }) => void) | null = null;
    onclose: (() => void) | null = null;
    onerror: (() => void) | null = null;
    readyState = 0;
    sent: string[] = [];
    closed = false;

    constructor(public url: string) {}

    send(data: string): void {
        this.sent.push(data);
    }

    close(): void {
        this.closed = true;
        this.readyState = 3;
    }

    open(): void {
        this.readyState = 1;
        this.onopen?.();
    }

    message(data: string): void {
        this.onmessage?.({ data });
    }

    drop(): void {
        this.readyState = 3;
        this.onclose?.();
    }
}

function sessionResponse() {
    return {
        ok: true,
        status: 200,
        json: async () => ({ session_id: "s1", ws_url: "/session/s1/ws" }),
    };
}

function harness(fetchImpl?: () => Promise<ReturnType<typeof sessionResponse>>) {
    const sockets: FakeSocket[] = [];
    const states: Array<[ClientState, string]> = [];
    const frames: Frame[] = [];
    let fetches = 0;
    const client = new SessionClient("http://example.test:8000", {
        retryMs: 50,
        fetchFn: async (url, init) => {
            fetches++;
            expect(url).toBe("http://example.test:8000/session");
            expect(init?.method).toBe("POST");
            return (fetchImpl ?? (async () => sessionResponse()))();
        },
        wsFactory: (url) => {
            const socket = new FakeSocket(url);
            sockets.push(socket);
            return socket;
        },
        onState: (state, detail) => states.push([state, detail]),
        onFrame: (frame) => frames.push(frame),
    });
    return { client, sockets, states, frames, fetchCount: () => fetches };
}

describe("SessionClient", () => {
    it("shows the session id once the stream is open", async () => {
        const h = harness();
        await h.client.connect();
        expect(h.sockets).toHaveLength(1);
        expect(h.sockets[0].url).toBe("ws://example.test:8000/session/s1/ws");
        expect(h.client.currentState).toBe("connecting");
        h.sockets[0].open();
        expect(h.client.currentState).toBe("open");
        expect(h.states.at(-1)).toEqual(["open", "s1"]);
        expect(h.client.session?.sessionId).toBe("s1");
    });

    it("delivers parsed frames and skips unparseable ones", async () => {
        const h = harness();
        await h.client.connect();
        h.sockets[0].open();
        h.sockets[0].message('{"index":0,"t":0.0,"type":"bar"}');
        h.sockets[0].message("garbage");
        h.sockets[0].message('{"dur":0.5,"pitch":52,"t":0.0,"track":"bass","vel":62}');
        expect(h.frames).toEqual([
            { type: "bar", t: 0, index: 0 },
            { t: 0, track: "bass", pitch: 52, vel: 62, dur: 0.5 },
        ]);
    });

    it("only sends on an open socket", async () => {
        const h = harness();
        expect(h.client.sendEmotion(0.3, 0.9)).toBe(false);
        await h.client.connect();
        expect(h.client.sendEmotion(0.3, 0.9)).toBe(false); // not open yet
        h.sockets[0].open();
        expect(h.client.sendEmotion(0.3, 0.9)).toBe(true);
        expect(JSON.parse(h.sockets[0].sent[0])).toEqual({
            type: "emotion", valence: 0.3, arousal: 0.9,
        });
    });

    it("enters a retry state when the session request fails", async () => {
        vi.useFakeTimers();
        try {
            const h = harness(async () => {
                throw new Error("connection refused");
            });
            await h.client.connect();
            expect(h.client.currentState).toBe("retrying");
            expect(h.states.at(-1)?.[1]).toMatch(/connection refused/);
            expect(h.fetchCount()).toBe(1);
            await vi.advanceTimersByTimeAsync(60); // the retry fires
            expect(h.fetchCount()).toBe(2);
        } finally {
            vi.useRealTimers();
        }
    });

    it("retries when an open stream drops", async () => {
        vi.useFakeTimers();
        try {
            const h = harness();
            await h.client.connect();
            h.sockets[0].open();
            h.sockets[0].drop();
            expect(h.client.currentState).toBe("retrying");
            await vi.advanceTimersByTimeAsync(60);
            expect(h.sockets).toHaveLength(2); // a fresh socket after the backoff
        } finally {
            vi.useRealTimers();
        }
    });

    it("stays down after an explicit close", async () => {
        const h = harness();
        await h.client.connect();
        h.sockets[0].open();
        h.client.close();
        expect(h.client.currentState).toBe("closed");
        expect(h.sockets[0].closed).toBe(true);
        h.sockets[0].drop(); // a late close event must not trigger a retry
        expect(h.client.currentState).toBe("closed");
    });
});
