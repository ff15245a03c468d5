/** Typed view of the streaming wire format.
 *
 * Every WebSocket message is one JSON object.  Note frames carry no
 * "type" key; marker frames have "type" set to "tempo", "bar" or
 * "error".  Each frame has a timestamp "t" in seconds from session
 * start, and the server emits frames in non-decreasing t.
 */

export interface NoteFrame {
    t: number;
    track: string;
    pitch: number;
    vel: number;
    dur: number;
}

export interface TempoFrame {
    type: "tempo";
    t: number;
    bpm: number;
}

export interface BarFrame {
    type: "bar";
    t: number;
    index: number;
}

export interface ErrorFrame {
    type: "error";
    t: number;
    message: string;
}

export type Frame = NoteFrame | TempoFrame | BarFrame | ErrorFrame;

export function isNoteFrame(frame: Frame): frame is NoteFrame {
    return !("type" in frame);
}

function num(value: unknown): value is number {
    return typeof value === "number" && Number.isFinite(value);
}

/** Parse one wire message; throws on anything that is not a known frame. */
export function parseFrame(line: string): Frame {
    let raw: unknown;
    try {
        raw = JSON.parse(line);
    } catch {
        throw new Error(`frame is not valid JSON: ${line}`);
    }
    if (typeof raw !== "object" || raw === null || Array.isArray(raw)) {
        throw new Error(`frame is not an object: ${line}`);
    }
    const obj = raw as Record<string, unknown>;
    if (!num(obj.t)) {
        throw new Error(`frame has no numeric t: ${line}`);
    }
    switch (obj.type) {
        case undefined:
            if (typeof obj.track === "string" && num(obj.pitch)
                    && num(obj.vel) && num(obj.dur)) {
                return obj as unknown as NoteFrame;
            }
            break;
        case "tempo":
            if (num(obj.bpm)) {
                return obj as unknown as TempoFrame;
            }
            break;
        case "bar":
            if (num(obj.index)) {
                return obj as unknown as BarFrame;
            }
            break;
        case "error":
            if (typeof obj.message === "string") {
                return obj as unknown as ErrorFrame;
            }
            break;
    }
    throw new Error(`unrecognized frame: ${line}`);
}
