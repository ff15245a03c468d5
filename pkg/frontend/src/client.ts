/** Session client: creates a session over HTTP, streams frames over a
 * WebSocket, and reconnects with a fixed backoff when either step
 * fails.  The UI surfaces the state changes; frames go to onFrame.
 */

import { Frame, parseFrame } from "./wire.js";

export type ClientState = "idle" | "connecting" | "open" | "retrying" | "closed";

export interface SessionInfo {
    sessionId: string;
    wsUrl: string;
}

/** The slice of WebSocket the client touches, so tests can fake it. */
export interface SocketLike {
    onopen: (() => void) | null;
    onmessage: ((ev: { data: unknown }) => void) | null;
    onclose: (() => void) | null;
    onerror: (() => void) | null;
    readyState: number;
    send(data: string): void;
    close(): void;
}

interface ResponseLike {
    ok: boolean;
    status: number;
    json(): Promise<unknown>;
}

export interface ClientOptions {
    seed?: number;
    valence?: number;
    arousal?: number;
    /** Bar count for a bounded session; omitted means endless. */
    bars?: number;
    retryMs?: number;
    fetchFn?: (url: string, init?: RequestInit) => Promise<ResponseLike>;
    wsFactory?: (url: string) => SocketLike;
    onState?: (state: ClientState, detail: string) => void;
    onFrame?: (frame: Frame) => void;
}

const RETRY_MS = 2000;
const OPEN = 1; // WebSocket.OPEN without needing the global

export class SessionClient {
    session: SessionInfo | null = null;

    private state: ClientState = "idle";
    private socket: SocketLike | null = null;
    private retryTimer: ReturnType<typeof setTimeout> | null = null;
    private stopped = false;

    constructor(private baseUrl: string, private opts: ClientOptions = {}) {}

    get currentState(): ClientState {
        return this.state;
    }

    /** Create a session and open its stream; on failure, schedule a retry.
     * Resolves once the socket is handed off (not once it is open). */
    async connect(): Promise<void> {
        this.stopped = false;
        if (this.retryTimer !== null) {
            clearTimeout(this.retryTimer);
            this.retryTimer = null;
        }
        this.setState("connecting", "");
        let info: SessionInfo;
        try {
            info = await this.createSession();
        } catch (err) {
            this.scheduleRetry(`session request failed: ${String(err)}`);
            return;
        }
        this.session = info;
        this.openSocket(info);
    }

    close(): void {
        this.stopped = true;
        if (this.retryTimer !== null) {
            clearTimeout(this.retryTimer);
            this.retryTimer = null;
        }
        if (this.socket) {
            this.socket.onclose = null;
            this.socket.close();
            this.socket = null;
        }
        this.setState("closed", "");
    }

    /** Send one control message if the socket is open; true when sent. */
    send(msg: object): boolean {
        if (!this.socket || this.socket.readyState !== OPEN) {
            return false;
        }
        this.socket.send(JSON.stringify(msg));
        return true;
    }

    sendEmotion(valence: number, arousal: number): boolean {
        return this.send({ type: "emotion", valence, arousal });
    }

    pause(): boolean {
        return this.send({ type: "pause" });
    }

    resume(): boolean {
        return this.send({ type: "resume" });
    }

    private setState(state: ClientState, detail: string): void {
        this.state = state;
        this.opts.onState?.(state, detail);
    }

    private async createSession(): Promise<SessionInfo> {
        const fetchFn = this.opts.fetchFn ?? fetch.bind(globalThis);
        const body: Record<string, number> = {};
        if (this.opts.seed !== undefined) {
            body.seed = this.opts.seed;
        }
        if (this.opts.valence !== undefined) {
            body.valence = this.opts.valence;
        }
        if (this.opts.arousal !== undefined) {
            body.arousal = this.opts.arousal;
        }
        if (this.opts.bars !== undefined) {
            body.bars = this.opts.bars;
        }
        const resp = await fetchFn(`${this.baseUrl}/session`, {
            method: "POST",
            headers: { "content-type": "application/json" },
            body: JSON.stringify(body),
        });
        if (!resp.ok) {
            throw new Error(`HTTP ${resp.status}`);
        }
        const data = await resp.json() as { session_id?: string; ws_url?: string };
        if (!data.session_id || !data.ws_url) {
            throw new Error("malformed session response");
        }
        return { sessionId: data.session_id, wsUrl: data.ws_url };
    }

    private openSocket(info: SessionInfo): void {
        const wsBase = this.baseUrl.replace(/^http/, "ws");
        const factory = this.opts.wsFactory
            ?? ((url: string) => new WebSocket(url) as unknown as SocketLike);
        const socket = factory(wsBase + info.wsUrl);
        this.socket = socket;
        socket.onopen = () => {
            this.setState("open", info.sessionId);
        };
        socket.onmessage = (ev) => {
            let frame: Frame;
            try {
                frame = parseFrame(String(ev.data));
            } catch {
                return; // an unknown frame is not worth dropping the session
            }
            this.opts.onFrame?.(frame);
        };
        socket.onerror = () => {
            // the close handler does the bookkeeping
        };
        socket.onclose = () => {
            if (this.socket === socket) {
                this.socket = null;
            }
            if (!this.stopped) {
                this.scheduleRetry("stream closed");
            }
        };
    }

    private scheduleRetry(reason: string): void {
        if (this.stopped) {
            return;
        }
        this.setState("retrying", reason);
        const delay = this.opts.retryMs ?? RETRY_MS;
        this.retryTimer = setTimeout(() => {
            this.retryTimer = null;
            void this.connect();
        }, delay);
    }
}
