import { SessionClient, ClientState } from "./client.js";
import { PadState, Emotion } from "./pad.js";
import { PianoRoll, TRACK_COLORS } from "./pianoroll.js";
import { Synth } from "./synth.js";
import { RateLimiter } from "./throttle.js";
import { BarMark, trajectoryJson } from "./trajectory.js";
import { isNoteFrame } from "./wire.js";

const PAD_SIZE = 280;

function el<K extends keyof HTMLElementTagNameMap>(
    tag: K, className?: string, text?: string,
): HTMLElementTagNameMap[K] {
    const node = document.createElement(tag);
    if (className) {
        node.className = className;
    }
    if (text !== undefined) {
        node.textContent = text;
    }
    return node;
}

const root = document.getElementById("app");
if (!root) {
    throw new Error("missing #app element");
}

// header
const header = el("div", "header");
const statusPill = el("span", "pill idle", "idle");
const sessionLabel = el("span", "session", "no session");
const tempoLabel = el("span", "tempo", "");
header.append(el("span", "title", "moodpop steering"), statusPill, sessionLabel, tempoLabel);
root.append(header);

// controls
const controls = el("div", "controls");
const urlInput = el("input") as HTMLInputElement;
urlInput.value = "http://localhost:8000";
urlInput.size = 24;
const seedInput = el("input") as HTMLInputElement;
seedInput.type = "number";
seedInput.value = "1";
seedInput.size = 6;
const connectBtn = el("button", "", "connect");
const pauseBtn = el("button", "", "pause");
pauseBtn.disabled = true;
const exportBtn = el("button", "", "export trajectory");
exportBtn.disabled = true;
controls.append(el("label", "", "server "), urlInput,
    el("label", "", " seed "), seedInput, connectBtn, pauseBtn, exportBtn);
root.append(controls);

// pad and roll
const row = el("div", "row");
const padBox = el("div", "padbox");
const padEl = el("div", "pad");
padEl.style.width = `${PAD_SIZE}px`;
padEl.style.height = `${PAD_SIZE}px`;
const cursor = el("div", "cursor");
padEl.append(cursor);
padBox.append(el("div", "axis top", "arousal +"), padEl,
    el("div", "axis bottom", "valence - to +"));
const canvas = el("canvas") as HTMLCanvasElement;
canvas.width = 640;
canvas.height = 320;
row.append(padBox, canvas);
root.append(row);

const errorLine = el("div", "errorline");
root.append(errorLine);

const pad = new PadState(PAD_SIZE, PAD_SIZE);
const roll = new PianoRoll(canvas);
const synth = new Synth();
const limiter = new RateLimiter();
const marks: BarMark[] = [];

let emotion: Emotion = { valence: 0.5, arousal: 0.5 };
let client: SessionClient | null = null;
let paused = false;
let trailing: ReturnType<typeof setTimeout> | null = null;
let lastFrameT = 0;
let frozenPlayhead = 0;

function drawCursor(): void {
    const p = pad.emotionToPoint(emotion);
    cursor.style.left = `${p.x}px`;
    cursor.style.top = `${p.y}px`;
}

function onState(state: ClientState, detail: string): void {
    statusPill.textContent = state === "retrying" ? "retrying" : state;
    statusPill.className = `pill ${state}`;
    if (state === "open") {
        sessionLabel.textContent = `session ${detail}`;
        errorLine.textContent = "";
        pauseBtn.disabled = false;
    } else if (state === "retrying") {
        sessionLabel.textContent = "no session";
        errorLine.textContent = detail;
        pauseBtn.disabled = true;
    }
}

function sendEmotion(e: Emotion, now: number): void {
    if (!client) {
        return;
    }
    if (limiter.allow(now)) {
        client.sendEmotion(e.valence, e.arousal);
    }
}

// the final drag position must reach the server even when the limiter
// just closed, so it goes out as soon as the rate bound allows
function sendTrailing(e: Emotion): void {
    if (trailing !== null) {
        clearTimeout(trailing);
    }
    trailing = setTimeout(() => {
        trailing = null;
        if (client && limiter.allow(performance.now())) {
            client.sendEmotion(e.valence, e.arousal);
        }
    }, limiter.waitMs(performance.now()));
}

padEl.addEventListener("pointerdown", (ev) => {
    padEl.setPointerCapture(ev.pointerId);
    const rect = padEl.getBoundingClientRect();
    emotion = pad.beginDrag(ev.clientX - rect.left, ev.clientY - rect.top,
        performance.now());
    drawCursor();
    sendEmotion(emotion, performance.now());
    exportBtn.disabled = false;
});

padEl.addEventListener("pointermove", (ev) => {
    const rect = padEl.getBoundingClientRect();
    const e = pad.moveDrag(ev.clientX - rect.left, ev.clientY - rect.top,
        performance.now());
    if (e) {
        emotion = e;
        drawCursor();
        sendEmotion(emotion, performance.now());
    }
});

padEl.addEventListener("pointerup", (ev) => {
    const rect = padEl.getBoundingClientRect();
    const e = pad.endDrag(ev.clientX - rect.left, ev.clientY - rect.top,
        performance.now());
    if (e) {
        emotion = e;
        drawCursor();
        sendTrailing(emotion);
    }
});

connectBtn.addEventListener("click", () => {
    client?.close();
    synth.start(); // inside the click so the audio context may run
    synth.resetClock();
    roll.clear();
    pad.clearRecording();
    marks.length = 0;
    limiter.reset();
    paused = false;
    pauseBtn.textContent = "pause";
    emotion = { valence: 0.5, arousal: 0.5 };
    drawCursor();
    pad.push(emotion, performance.now());
    exportBtn.disabled = false;

    client = new SessionClient(urlInput.value.replace(/\/+$/, ""), {
        seed: Number(seedInput.value) || 1,
        valence: emotion.valence,
        arousal: emotion.arousal,
        onState,
        onFrame: (frame) => {
            if (isNoteFrame(frame)) {
                lastFrameT = frame.t;
                synth.scheduleNote(frame);
                roll.addNote(frame);
            } else if (frame.type === "bar") {
                marks.push({ index: frame.index, at: performance.now() });
                roll.addBar(frame);
            } else if (frame.type === "tempo") {
                tempoLabel.textContent = `${frame.bpm.toFixed(1)} bpm`;
            } else {
                errorLine.textContent = frame.message;
            }
        },
    });
    void client.connect();
});

pauseBtn.addEventListener("click", () => {
    if (!client) {
        return;
    }
    if (paused) {
        client.resume();
        paused = false;
        pauseBtn.textContent = "pause";
    } else {
        client.pause();
        paused = true;
        frozenPlayhead = synth.playheadT() ?? lastFrameT;
        pauseBtn.textContent = "resume";
    }
});

exportBtn.addEventListener("click", () => {
    const json = trajectoryJson(pad.recorded(), marks);
    if (json === null) {
        return;
    }
    const blob = new Blob([json], { type: "application/json" });
    const a = el("a") as HTMLAnchorElement;
    a.href = URL.createObjectURL(blob);
    a.download = "trajectory.json";
    a.click();
    URL.revokeObjectURL(a.href);
});

// legend
const legend = el("div", "legend");
for (const [track, color] of Object.entries(TRACK_COLORS)) {
    const item = el("span", "legenditem", track);
    item.style.borderLeft = `10px solid ${color}`;
    legend.append(item);
}
root.append(legend);

drawCursor();

function tick(): void {
    const t = paused ? frozenPlayhead : (synth.playheadT() ?? lastFrameT);
    roll.draw(t);
    requestAnimationFrame(tick);
}
requestAnimationFrame(tick);
