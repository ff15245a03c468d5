"""Instrument generators: bass, plucked, strummed voice leading, melody.

The strummed-voicing tests use an independently written exhaustive-search
oracle (chromatic upward scan instead of interval stacking) so the two
implementations share no code.
"""

import numpy as np
import pytest

from moodpop.harmony import Chord, chord_tones
from moodpop.performers import (
    Motif,
    MotifNote,
    TransitionMatrix,
    Voicing,
    bass_notes,
    dissimilarity,
    matrix_for_valence,
    melody_first_half,
    melody_matrix_bar,
    melody_second_half,
    melody_step,
    plucked_notes,
    register_step,
    strummed_voicing,
    voicing_candidates,
)
from moodpop.rhythm import Onset

C = Chord(name="C", root=0, quality="major", function="I")
AM = Chord(name="Am", root=9, quality="minor", function="vi")
G7 = Chord(name="G7", root=7, quality="dominant7", function="V")


class TestDissimilarity:
    def test_identity(self):
        v = Voicing((60, 64, 67))
        assert dissimilarity(v, v) == 0

    def test_hand_value(self):
        assert dissimilarity(Voicing((60, 64, 67)), Voicing((60, 65, 69))) == 3

    def test_padding_doubles_top_note(self):
        # (60,64,67,67) vs (60,64,67,70)
        assert dissimilarity(Voicing((60, 64, 67)), Voicing((60, 64, 67, 70))) == 3

    def test_symmetric(self, rng):
        for _ in range(200):
            a = Voicing(tuple(sorted(rng.choice(range(40, 80), size=3,
                                                replace=False).tolist())))
            b = Voicing(tuple(sorted(rng.choice(range(40, 80), size=4,
                                                replace=False).tolist())))
            assert dissimilarity(a, b) == dissimilarity(b, a)

    def test_positive_for_distinct_voicings(self):
        assert dissimilarity(Voicing((60, 64, 67)), Voicing((60, 64, 68))) > 0


class TestVoicingType:
    def test_must_ascend(self):
        with pytest.raises(ValueError):
            Voicing((64, 60))

    def test_inversion_range(self):
        with pytest.raises(ValueError):
            Voicing((60, 64, 67), inversion=3)

    def test_non_empty(self):
        with pytest.raises(ValueError):
            Voicing(())


# -- independent oracle ------------------------------------------------------


def _oracle_candidates(chord):
    """Close-position voicings by chromatic scan: from each in-range bass
    pitch, walk upward taking the next unused chord pitch class."""
    tones = chord_tones(chord)
    tone_set = set(tones)
    out = []
    for bass in range(48, 68):
        if bass % 12 not in tone_set:
            continue
        notes = [bass]
        used = {bass % 12}
        p = bass
        while len(notes) < len(tones):
            p += 1
            if p % 12 in tone_set and p % 12 not in used:
                notes.append(p)
                used.add(p % 12)
        out.append((tuple(notes), tones.index(bass % 12)))
    return out


def _oracle_dissimilarity(a, b):
    n = max(len(a), len(b))
    aa = list(a) + [a[-1]] * (n - len(a))
    bb = list(b) + [b[-1]] * (n - len(b))
    return sum(abs(x - y) for x, y in zip(aa, bb))


def _oracle_best(prev_notes, chord):
    return min(
        _oracle_candidates(chord),
        key=lambda c: (_oracle_dissimilarity(prev_notes, c[0]), c[0][0], c[1]),
    )


class TestStrummedVoicing:
    def test_candidates_match_oracle(self, config):
        for chord in config.graph.vertices.values():
            got = {(v.notes, v.inversion)
                   for v in voicing_candidates(chord, (48, 67))}
            assert got == set(_oracle_candidates(chord))

    def test_c_to_a_minor_example(self):
        out = strummed_voicing(Voicing((60, 64, 67)), AM)
        assert out.notes == (60, 64, 69)
        assert dissimilarity(Voicing((60, 64, 67)), out) == 2

    def test_identity_when_prev_is_a_candidate(self):
        prev = Voicing((60, 64, 67), inversion=0)
        out = strummed_voicing(prev, C)
        assert out.notes == prev.notes

    def test_oracle_on_1000_random_instances(self, config):
        chords = list(config.graph.vertices.values())
        rng = np.random.default_rng(314)
        for _ in range(1000):
            prev_chord = chords[int(rng.integers(len(chords)))]
            prev_pool = voicing_candidates(prev_chord, (48, 67))
            prev = prev_pool[int(rng.integers(len(prev_pool)))]
            chord = chords[int(rng.integers(len(chords)))]
            got = strummed_voicing(prev, chord)
            want_notes, want_inv = _oracle_best(prev.notes, chord)
            assert got.notes == want_notes
            assert got.inversion == want_inv

    def test_all_pitch_classes_belong_to_chord(self, config):
        for chord in config.graph.vertices.values():
            for v in voicing_candidates(chord, (48, 67)):
                assert {n % 12 for n in v.notes} == set(chord_tones(chord))


class TestRegisterStep:
    def test_hold_probability(self):
        """100k trials: unchanged with frequency 0.6 +- 0.01."""
        rng = np.random.default_rng(21)
        n = 100_000
        held = sum(register_step(1, 0.5, rng, 2) == 1 for _ in range(n))
        assert held / n == pytest.approx(0.6, abs=0.01)

    def test_up_down_split_at_half_valence(self):
        # unconditional up and down each 0.4 * 0.5 = 0.2
        rng = np.random.default_rng(22)
        n = 100_000
        ups = downs = 0
        for _ in range(n):
            out = register_step(1, 0.5, rng, 2)
            ups += out == 2
            downs += out == 0
        assert ups / n == pytest.approx(0.2, abs=0.01)
        assert downs / n == pytest.approx(0.2, abs=0.01)

    def test_full_valence_never_steps_down(self):
        rng = np.random.default_rng(23)
        outcomes = {register_step(1, 1.0, rng, 2) for _ in range(20_000)}
        assert outcomes == {1, 2}

    def test_zero_valence_never_steps_up(self):
        rng = np.random.default_rng(24)
        outcomes = {register_step(1, 0.0, rng, 2) for _ in range(20_000)}
        assert outcomes == {0, 1}

    def test_clamp_is_a_no_op(self):
        rng = np.random.default_rng(25)
        for _ in range(20_000):
            assert register_step(0, 0.0, rng, 2) == 0  # down from floor blocked
        for _ in range(20_000):
            assert register_step(2, 1.0, rng, 2) == 2  # up from ceiling blocked

    def test_chain_never_leaves_range(self):
        rng = np.random.default_rng(26)
        inv = 0
        for _ in range(50_000):
            inv = register_step(inv, float(rng.random()), rng, 3)
            assert 0 <= inv <= 3


class TestBass:
    ONSETS = [Onset(0.0, 1.0), Onset(2.0, 1.0)]

    def test_only_roots_and_fifths(self, rng):
        for _ in range(200):
            for onset, pitch in bass_notes(C, self.ONSETS, rng):
                assert pitch % 12 in {0, 7}
                assert 36 <= pitch <= 47

    def test_first_beat_root_probability(self):
        """100k bars: first-beat root frequency 0.9 +- 0.01."""
        rng = np.random.default_rng(31)
        n = 100_000
        first = [Onset(0.0, 4.0)]
        roots = sum(bass_notes(C, first, rng)[0][1] % 12 == 0 for _ in range(n))
        assert roots / n == pytest.approx(0.9, abs=0.01)

    def test_later_beats_fifty_fifty(self):
        rng = np.random.default_rng(32)
        n = 100_000
        later = [Onset(2.0, 1.0)]
        roots = sum(bass_notes(C, later, rng)[0][1] % 12 == 0 for _ in range(n))
        assert roots / n == pytest.approx(0.5, abs=0.01)

    def test_deterministic(self):
        a = bass_notes(C, self.ONSETS, np.random.default_rng(9))
        b = bass_notes(C, self.ONSETS, np.random.default_rng(9))
        assert a == b


class TestPlucked:
    def test_silent_at_high_arousal(self, rng):
        assert plucked_notes(C, 0.8, 0.2, rng) == []
        assert plucked_notes(C, 0.7, 0.3, rng) == []

    def test_sounds_just_below_boundary(self, rng):
        assert plucked_notes(C, 0.69, 0.31, rng) != []

    def test_chord_tone_uniformity(self):
        """100k tone draws on C major: each of {0,4,7} at 1/3 +- 0.01."""
        rng = np.random.default_rng(41)
        counts = {0: 0, 4: 0, 7: 0}
        n = 100_000
        for _ in range(n):
            # roughness 1.0 -> exactly one onset, hence one tone draw
            (_, pitch), = plucked_notes(C, 0.0, 1.0, rng)
            counts[pitch % 12] += 1
        for c in counts.values():
            assert c / n == pytest.approx(1 / 3, abs=0.01)

    def test_register_and_duration(self, rng):
        for onset, pitch in plucked_notes(C, 0.3, 0.5, rng):
            assert 60 <= pitch <= 71
            assert onset.duration == 0.5


class TestTransitionMatrix:
    SMALL = TransitionMatrix(pitches=(60, 62, 64),
                             rows=((0.5, 0.5, 0.0),
                                   (0.25, 0.5, 0.25),
                                   (0.0, 1.0, 0.0)))

    def test_rows_must_be_stochastic(self):
        from moodpop.errors import ConfigError
        with pytest.raises(ConfigError):
            TransitionMatrix(pitches=(60, 62), rows=((0.5, 0.4), (0.5, 0.5)))

    def test_index_snaps_to_nearest(self):
        assert self.SMALL.index_of(60) == 0
        assert self.SMALL.index_of(59) == 0
        assert self.SMALL.index_of(63) == 1  # tie 62/64 snaps low
        assert self.SMALL.index_of(90) == 2

    def test_step_follows_row(self):
        rng = np.random.default_rng(51)
        out = {melody_step(self.SMALL, 64, rng) for _ in range(100)}
        assert out == {62}  # row for 64 is deterministic

    def test_empirical_transition_frequencies(self, config):
        """100k steps from one pitch: frequencies match the row +- 0.01."""
        for matrix in (config.melody_low, config.melody_high):
            pitch = matrix.pitches[4]
            row = matrix.rows[4]
            rng = np.random.default_rng(52)
            n = 100_000
            counts = dict.fromkeys(matrix.pitches, 0)
            for _ in range(n):
                counts[melody_step(matrix, pitch, rng)] += 1
            for p, prob in zip(matrix.pitches, row):
                assert counts[p] / n == pytest.approx(prob, abs=0.01)

    def test_matrix_selection_split(self, config):
        assert matrix_for_valence(config.melody_low, config.melody_high,
                                  0.5) is config.melody_low
        assert matrix_for_valence(config.melody_low, config.melody_high,
                                  0.51) is config.melody_high


class TestMelodyBars:
    def test_bar_notes_sustain_to_next_onset(self, config, rng):
        events, _last = melody_matrix_bar(0.4, 72, config.melody_low,
                                          config.melody_high, 0.5, rng)
        for (onset, _), (nxt, _) in zip(events, events[1:]):
            assert onset.offset + onset.duration == nxt.offset
        last_onset = events[-1][0]
        assert last_onset.offset + last_onset.duration == 4.0

    def test_first_half_is_four_bars(self, config, rng):
        bars = melody_first_half(0.6, 72, config.melody_low,
                                 config.melody_high, 0.5, rng)
        assert len(bars) == 4
        assert all(bar for bar in bars)

    def test_pitches_stay_in_alphabet(self, config, rng):
        alphabet = set(config.melody_high.pitches)
        bars = melody_first_half(0.9, 72, config.melody_low,
                                 config.melody_high, 0.3, rng)
        for bar in bars:
            for _, pitch in bar:
                assert pitch in alphabet


class TestMotifs:
    def test_motif_validation(self):
        from moodpop.errors import ConfigError
        with pytest.raises(ConfigError):
            Motif("m", (MotifNote(16.0, 72, 1.0),))
        with pytest.raises(ConfigError):
            Motif("m", (MotifNote(1.0, 72, 1.0), MotifNote(0.0, 72, 1.0)))

    def test_boundary_goes_to_moderate_region(self, config):
        rng = np.random.default_rng(61)
        motif = melody_second_half(0.30, config.motif_bank, rng)
        moderate_ids = {m.motif_id for m in config.motif_bank.motifs["moderate"]}
        assert motif.motif_id in moderate_ids

    def test_selection_equiprobable(self, config):
        """30k selections at aro=0.9: each high motif 1/3 +- 0.02."""
        rng = np.random.default_rng(62)
        n = 30_000
        counts = {}
        for _ in range(n):
            m = melody_second_half(0.9, config.motif_bank, rng)
            counts[m.motif_id] = counts.get(m.motif_id, 0) + 1
        assert len(counts) == 3
        for c in counts.values():
            assert c / n == pytest.approx(1 / 3, abs=0.02)

    def test_deterministic(self, config):
        a = melody_second_half(0.2, config.motif_bank, np.random.default_rng(8))
        b = melody_second_half(0.2, config.motif_bank, np.random.default_rng(8))
        assert a.motif_id == b.motif_id

    def test_bar_notes_rebase(self, config):
        motif = config.motif_bank.motifs["low"][0]
        total = sum(len(motif.bar_notes(b)) for b in range(4))
        assert total == len(motif.notes)
        for b in range(4):
            for onset, _ in motif.bar_notes(b):
                assert 0.0 <= onset.offset < 4.0
