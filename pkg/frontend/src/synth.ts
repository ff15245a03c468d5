/** Small WebAudio renderer: one voice per note, one timbre per track.
 *
 * Frames carry times in stream seconds; an anchor maps those onto the
 * AudioContext clock with a little scheduling headroom.  If a frame
 * would land in the past (start of session, or after a pause) the
 * anchor snaps forward so playback simply resumes.
 */

import { NoteFrame } from "./wire.js";

export function midiToHz(pitch: number): number {
    return 440 * Math.pow(2, (pitch - 69) / 12);
}

/** Perceptual-ish velocity curve; squared so low velocities sit back. */
export function velocityToGain(vel: number): number {
    const v = Math.max(0, Math.min(127, vel)) / 127;
    return v * v * 0.5;
}

interface Timbre {
    wave: OscillatorType;
    gain: number;
    attack: number;
    release: number;
    cutoff?: number;
}

const TIMBRES: Record<string, Timbre> = {
    bass: { wave: "triangle", gain: 1.0, attack: 0.005, release: 0.06, cutoff: 900 },
    strummed_gtr: { wave: "sawtooth", gain: 0.45, attack: 0.004, release: 0.08, cutoff: 2200 },
    plucked_gtr: { wave: "square", gain: 0.35, attack: 0.002, release: 0.12, cutoff: 3000 },
    violins: { wave: "sawtooth", gain: 0.4, attack: 0.06, release: 0.25, cutoff: 3500 },
    french_horn: { wave: "sine", gain: 0.75, attack: 0.04, release: 0.18 },
};

const HEADROOM = 0.12; // seconds between "scheduled" and "audible"

export class Synth {
    private ctx: AudioContext | null = null;
    private master: GainNode | null = null;
    private noise: AudioBuffer | null = null;
    private anchor: number | null = null;

    /** Must be called from a user gesture so the context may start. */
    start(): void {
        if (this.ctx) {
            void this.ctx.resume();
            return;
        }
        this.ctx = new AudioContext();
        this.master = this.ctx.createGain();
        this.master.gain.value = 0.6;
        this.master.connect(this.ctx.destination);
        const len = Math.floor(this.ctx.sampleRate * 0.5);
        this.noise = this.ctx.createBuffer(1, len, this.ctx.sampleRate);
        const data = this.noise.getChannelData(0);
        for (let i = 0; i < len; i++) {
            data[i] = Math.random() * 2 - 1;
        }
        void this.ctx.resume();
    }

    stop(): void {
        if (this.ctx) {
            void this.ctx.close();
        }
        this.ctx = null;
        this.master = null;
        this.noise = null;
        this.anchor = null;
    }

    get running(): boolean {
        return this.ctx !== null;
    }

    /** Stream time currently at the speakers, for the playhead. */
    playheadT(): number | null {
        if (!this.ctx || this.anchor === null) {
            return null;
        }
        return this.ctx.currentTime - this.anchor;
    }

    resetClock(): void {
        this.anchor = null;
    }

    scheduleNote(frame: NoteFrame): void {
        if (!this.ctx || !this.master) {
            return;
        }
        const now = this.ctx.currentTime;
        if (this.anchor === null || this.anchor + frame.t < now + 0.01) {
            this.anchor = now + HEADROOM - frame.t;
        }
        const at = this.anchor + frame.t;
        if (frame.track === "percussion") {
            this.percussionVoice(frame, at);
        } else {
            this.tonalVoice(frame, at);
        }
    }

    private tonalVoice(frame: NoteFrame, at: number): void {
        const ctx = this.ctx!;
        const timbre = TIMBRES[frame.track] ?? TIMBRES.french_horn;
        const osc = ctx.createOscillator();
        osc.type = timbre.wave;
        osc.frequency.value = midiToHz(frame.pitch);

        const amp = ctx.createGain();
        const peak = velocityToGain(frame.vel) * timbre.gain;
        const end = at + Math.max(frame.dur, 0.05);
        amp.gain.setValueAtTime(0, at);
        amp.gain.linearRampToValueAtTime(peak, at + timbre.attack);
        amp.gain.setValueAtTime(peak, Math.max(end - 0.01, at + timbre.attack));
        amp.gain.linearRampToValueAtTime(0, end + timbre.release);

        let head: AudioNode = osc;
        if (timbre.cutoff !== undefined) {
            const filter = ctx.createBiquadFilter();
            filter.type = "lowpass";
            filter.frequency.value = timbre.cutoff;
            head.connect(filter);
            head = filter;
        }
        head.connect(amp);
        amp.connect(this.master!);
        osc.start(at);
        osc.stop(end + timbre.release + 0.02);
    }

    // kick 36 gets a sine drop, everything else is shaped noise
    private percussionVoice(frame: NoteFrame, at: number): void {
        const ctx = this.ctx!;
        const amp = ctx.createGain();
        const peak = velocityToGain(frame.vel) * 0.9;
        amp.connect(this.master!);

        if (frame.pitch <= 36) {
            const osc = ctx.createOscillator();
            osc.type = "sine";
            osc.frequency.setValueAtTime(120, at);
            osc.frequency.exponentialRampToValueAtTime(45, at + 0.12);
            amp.gain.setValueAtTime(peak, at);
            amp.gain.linearRampToValueAtTime(0, at + 0.18);
            osc.connect(amp);
            osc.start(at);
            osc.stop(at + 0.2);
            return;
        }
        if (!this.noise) {
            return;
        }
        const src = ctx.createBufferSource();
        src.buffer = this.noise;
        const filter = ctx.createBiquadFilter();
        const hat = frame.pitch >= 42;
        filter.type = hat ? "highpass" : "bandpass";
        filter.frequency.value = hat ? 6000 : 1800;
        const decay = hat ? 0.06 : 0.14;
        amp.gain.setValueAtTime(peak * (hat ? 0.5 : 0.8), at);
        amp.gain.linearRampToValueAtTime(0, at + decay);
        src.connect(filter);
        filter.connect(amp);
        src.start(at);
        src.stop(at + decay + 0.02);
    }
}
