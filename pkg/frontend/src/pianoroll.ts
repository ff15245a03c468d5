/** Scrolling piano roll of the incoming note frames.
 *
 * Frames arrive in timestamp order and are appended as-is; drawing just
 * walks the retained window, so the roll stays cheap even on long
 * sessions.  The playhead sits at a fixed fraction of the canvas and
 * the notes scroll past it.
 */

import { BarFrame, NoteFrame } from "./wire.js";

export const TRACK_COLORS: Record<string, string> = {
    percussion: "#9099a8",
    bass: "#d08770",
    strummed_gtr: "#a3be8c",
    plucked_gtr: "#ebcb8b",
    violins: "#81a1c1",
    french_horn: "#b48ead",
};

const LOOKBACK = 3;   // seconds of history left of the playhead
const LOOKAHEAD = 7;  // seconds of future right of it
const PITCH_LO = 24;
const PITCH_HI = 96;

export class PianoRoll {
    private notes: NoteFrame[] = [];
    private bars: BarFrame[] = [];

    constructor(private canvas: HTMLCanvasElement) {}

    addNote(frame: NoteFrame): void {
        this.notes.push(frame);
    }

    addBar(frame: BarFrame): void {
        this.bars.push(frame);
    }

    clear(): void {
        this.notes = [];
        this.bars = [];
    }

    draw(nowT: number): void {
        const ctx = this.canvas.getContext("2d");
        if (!ctx) {
            return;
        }
        const w = this.canvas.width;
        const h = this.canvas.height;
        const left = nowT - LOOKBACK;
        const span = LOOKBACK + LOOKAHEAD;
        const x = (t: number) => ((t - left) / span) * w;
        const y = (pitch: number) =>
            h - ((pitch - PITCH_LO) / (PITCH_HI - PITCH_LO)) * h;

        ctx.fillStyle = "#14161c";
        ctx.fillRect(0, 0, w, h);

        this.prune(left);

        ctx.strokeStyle = "#2a2e3a";
        ctx.fillStyle = "#566";
        ctx.font = "10px sans-serif";
        for (const bar of this.bars) {
            const bx = x(bar.t);
            if (bx < 0 || bx > w) {
                continue;
            }
            ctx.beginPath();
            ctx.moveTo(bx, 0);
            ctx.lineTo(bx, h);
            ctx.stroke();
            ctx.fillText(String(bar.index), bx + 3, 10);
        }

        const noteH = Math.max(2, h / (PITCH_HI - PITCH_LO));
        for (const note of this.notes) {
            if (note.t > left + span) {
                break; // later notes are further right still
            }
            const nx = x(note.t);
            const nw = Math.max(2, (note.dur / span) * w);
            ctx.fillStyle = TRACK_COLORS[note.track] ?? "#c0c0c0";
            ctx.globalAlpha = note.t <= nowT ? 0.95 : 0.55;
            ctx.fillRect(nx, y(note.pitch) - noteH, nw, noteH - 1);
        }
        ctx.globalAlpha = 1;

        const px = x(nowT);
        ctx.strokeStyle = "#e8e8e8";
        ctx.beginPath();
        ctx.moveTo(px, 0);
        ctx.lineTo(px, h);
        ctx.stroke();
    }

    private prune(left: number): void {
        // notes are time-ordered, so trim from the front
        let cut = 0;
        while (cut < this.notes.length
                && this.notes[cut].t + this.notes[cut].dur < left - 1) {
            cut++;
        }
        if (cut > 0) {
            this.notes.splice(0, cut);
        }
        let barCut = 0;
        while (barCut < this.bars.length && this.bars[barCut].t < left - 1) {
            barCut++;
        }
        if (barCut > 0) {
            this.bars.splice(0, barCut);
        }
    }
}
