/** The steering pad: a rectangle standing for the emotion unit square,
 * valence running left to right and arousal bottom to top.
 *
 * Drawing the cursor uses the display mapping
 *     x = valence * width        y = (1 - arousal) * height
 * and pointer input uses its exact affine inverse, clamped to [0, 1],
 * so the pad can never emit a point outside the unit square.  Every
 * drag position is also recorded with a timestamp so the session can
 * later be exported as a trajectory file.
 */

export interface Emotion {
    valence: number;
    arousal: number;
}

export interface RecordedPoint extends Emotion {
    /** Milliseconds on the caller's clock (performance.now() in the page). */
    t: number;
}

export function clamp01(x: number): number {
    if (Number.isNaN(x)) {
        return 0;
    }
    return x < 0 ? 0 : x > 1 ? 1 : x;
}

export class PadState {
    private dragging = false;
    private points: RecordedPoint[] = [];
    private lastT = -Infinity;

    constructor(public width: number, public height: number) {}

    /** Pixel position of an emotion, for drawing the cursor. */
    emotionToPoint(e: Emotion): { x: number; y: number } {
        return { x: e.valence * this.width, y: (1 - e.arousal) * this.height };
    }

    /** Emotion under a pointer position; inverse of emotionToPoint. */
    pointToEmotion(x: number, y: number): Emotion {
        return {
            valence: clamp01(x / this.width),
            arousal: clamp01(1 - y / this.height),
        };
    }

    resize(width: number, height: number): void {
        this.width = width;
        this.height = height;
    }

    get isDragging(): boolean {
        return this.dragging;
    }

    beginDrag(x: number, y: number, t: number): Emotion {
        this.dragging = true;
        return this.recordAt(x, y, t);
    }

    /** Returns null when no drag is active (stray move events). */
    moveDrag(x: number, y: number, t: number): Emotion | null {
        if (!this.dragging) {
            return null;
        }
        return this.recordAt(x, y, t);
    }

    endDrag(x: number, y: number, t: number): Emotion | null {
        if (!this.dragging) {
            return null;
        }
        const e = this.recordAt(x, y, t);
        this.dragging = false;
        return e;
    }

    /** Record an emotion that did not come from the pointer, e.g. the
     * session's starting emotion. */
    push(e: Emotion, t: number): void {
        this.store({ valence: clamp01(e.valence), arousal: clamp01(e.arousal) }, t);
    }

    /** Everything recorded so far; timestamps are non-decreasing. */
    recorded(): readonly RecordedPoint[] {
        return this.points;
    }

    clearRecording(): void {
        this.points = [];
        this.lastT = -Infinity;
    }

    private recordAt(x: number, y: number, t: number): Emotion {
        const e = this.pointToEmotion(x, y);
        this.store(e, t);
        return e;
    }

    private store(e: Emotion, t: number): void {
        // a clock step backwards must not produce a backwards trajectory
        const stamped = Math.max(t, this.lastT);
        this.lastT = stamped;
        this.points.push({ t: stamped, valence: e.valence, arousal: e.arousal });
    }
}
