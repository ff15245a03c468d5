/** Send-rate limiting for steering messages.
 *
 * The pad fires on every pointer move but the server should see at most
 * ten steering messages a second, so sends are gated here.  allow()
 * admits a call when at least minIntervalMs has passed since the last
 * admitted one, bounding the rate at 1000 / minIntervalMs.
 */

export const STEER_MIN_INTERVAL_MS = 100;

export class RateLimiter {
    private lastSent = -Infinity;

    constructor(private minIntervalMs: number = STEER_MIN_INTERVAL_MS) {}

    allow(nowMs: number): boolean {
        if (nowMs - this.lastSent < this.minIntervalMs) {
            return false;
        }
        this.lastSent = nowMs;
        return true;
    }

    /** Milliseconds until allow() would pass; 0 when it would pass now.
     * Used to schedule a trailing send for the final drag position. */
    waitMs(nowMs: number): number {
        const wait = this.minIntervalMs - (nowMs - this.lastSent);
        return wait > 0 ? wait : 0;
    }

    reset(): void {
        this.lastSent = -Infinity;
    }
}
