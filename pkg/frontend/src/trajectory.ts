/** Turning a recorded pad trajectory into the renderer's trajectory file.
 *
 * Bar marker frames tell us when each bar started on our own clock, so
 * a recorded point belongs to the last bar that started at or before
 * its timestamp.  The export is exactly the renderer's trajectory JSON:
 * {"points": [{"bar": ..., "valence": ..., "arousal": ...}, ...]} with
 * strictly increasing bars starting at 0.  When several points land in
 * the same bar the last one wins, which matches how the engine drains
 * steering input at bar boundaries.
 */

import { RecordedPoint } from "./pad.js";

export interface BarMark {
    index: number;
    /** Arrival time on the same clock as RecordedPoint.t. */
    at: number;
}

export interface TrajectoryPoint {
    bar: number;
    valence: number;
    arousal: number;
}

export function quantizeToBars(
    points: readonly RecordedPoint[],
    marks: readonly BarMark[],
): TrajectoryPoint[] {
    const byBar = new Map<number, TrajectoryPoint>();
    for (const p of points) {
        let bar = 0;
        for (let i = marks.length - 1; i >= 0; i--) {
            if (marks[i].at <= p.t) {
                bar = marks[i].index;
                break;
            }
        }
        byBar.set(bar, { bar, valence: p.valence, arousal: p.arousal });
    }
    const out = [...byBar.values()].sort((a, b) => a.bar - b.bar);
    if (out.length > 0 && out[0].bar !== 0) {
        // the earliest recorded value stands in from the top of the piece;
        // the file format requires a bar 0 entry
        out[0] = { ...out[0], bar: 0 };
    }
    return out;
}

/** Trajectory file contents for a recording, or null when there is
 * nothing to export yet (the export control stays disabled). */
export function trajectoryJson(
    points: readonly RecordedPoint[],
    marks: readonly BarMark[],
): string | null {
    const quantized = quantizeToBars(points, marks);
    if (quantized.length === 0) {
        return null;
    }
    return JSON.stringify({ points: quantized });
}
