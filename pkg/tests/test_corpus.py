import csv

import pytest
from hypothesis import given, strategies as st

from speechscreen.corpus import (DuplicateId, EmptyTranscript, Label,
                                 Split, UnknownLabel, UnknownSplit,
                                 UnreadableTranscript, corpus_stats,
                                 load_manifest, parse_chat, split_view)


class TestParseChat:
    def test_participant_tier_with_timing_bullet(self):
        assert parse_chat("*PAR: the boy is falling . \x1512_34\x15") == \
            "the boy is falling ."

    def test_plain_text_passthrough(self):
        assert parse_chat("plain sentence with no tiers") == \
            "plain sentence with no tiers"

    def test_investigator_only_raises(self):
        with pytest.raises(EmptyTranscript):
            parse_chat("*INV: tell me more .")

    def test_headers_and_dependent_tiers_dropped(self):
        raw = ("@Begin\n@Participants: PAR Participant\n"
               "*PAR: the jar is open .\n"
               "%mor: det|the n|jar cop|be adj|open .\n"
               "*INV: anything else ?\n"
               "*PAR: water everywhere .\n@End\n")
        assert parse_chat(raw) == "the jar is open . water everywhere ."

    def test_filled_pause_and_fragment_markers_keep_tokens(self):
        assert parse_chat("*PAR: &-um the boy &+sn fell .") == "um the boy sn fell ."

    def test_retrace_brackets_keep_words_drop_codes(self):
        raw = "*PAR: <the boy> [//] the boy fell [* syntax] ."
        assert parse_chat(raw) == "the boy the boy fell ."

    def test_events_pauses_and_shortenings(self):
        raw = "*PAR: &=laughs (be)cause (.) it spilled +..."
        assert parse_chat(raw) == "because it spilled ."

    def test_continuation_lines_join(self):
        raw = "*PAR: the mother is\n\tdrying the dishes .\n"
        assert parse_chat(raw) == "the mother is drying the dishes ."

    def test_empty_input(self):
        with pytest.raises(EmptyTranscript):
            parse_chat("   ")

    @given(st.text(alphabet=st.characters(min_codepoint=32, max_codepoint=126),
                   min_size=1, max_size=200))
    def test_idempotent(self, raw):
        try:
            once = parse_chat(raw)
        except EmptyTranscript:
            return
        assert parse_chat(once) == once


def _write_corpus(tmp_path, rows):
    tdir = tmp_path / "t"
    tdir.mkdir(exist_ok=True)
    manifest = tmp_path / "manifest.csv"
    with manifest.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "label", "split", "transcript_path"])
        for i, (tid, label, split, text) in enumerate(rows):
            path = tdir / f"{i}.txt"
            path.write_text(text)
            writer.writerow([tid, label, split, str(path)])
    return manifest


class TestLoadManifest:
    def test_three_valid_rows(self, tmp_path):
        manifest = _write_corpus(tmp_path, [
            ("S1", "case", "train", "the boy fell ."),
            ("S2", "control", "train", "a fine description indeed ."),
            ("S3", "case", "test", "um um the the jar ."),
        ])
        corpus = load_manifest(manifest)
        assert len(corpus.transcripts) == 3
        assert corpus.transcripts[0].label is Label.CASE
        assert corpus.transcripts[0].word_count == 3

    def test_duplicate_id(self, tmp_path):
        manifest = _write_corpus(tmp_path, [
            ("S001", "case", "train", "one ."),
            ("S001", "control", "test", "two ."),
        ])
        with pytest.raises(DuplicateId, match="S001"):
            load_manifest(manifest)

    def test_unknown_label_and_split(self, tmp_path):
        manifest = _write_corpus(tmp_path, [("S1", "sick", "train", "x .")])
        with pytest.raises(UnknownLabel, match="sick"):
            load_manifest(manifest)
        manifest = _write_corpus(tmp_path, [("S1", "case", "dev", "x .")])
        with pytest.raises(UnknownSplit, match="dev"):
            load_manifest(manifest)

    def test_unreadable_transcript(self, tmp_path):
        manifest = tmp_path / "m.csv"
        manifest.write_text("id,label,split,transcript_path\n"
                            "S1,case,train,missing.txt\n")
        with pytest.raises(UnreadableTranscript, match="S1"):
            load_manifest(manifest)

    def test_study_split_sizes(self, tmp_path):
        from speechscreen.toydata import materialize
        manifest = materialize(tmp_path, shape="study")
        corpus = load_manifest(manifest)
        sizes = {s: len(corpus.view(s)) for s in Split}
        assert sizes == {Split.TRAIN: 116, Split.VALIDATION: 50,
                         Split.TEST: 71}

    def test_optional_metadata_columns(self, tmp_path):
        tdir = tmp_path / "t"
        tdir.mkdir()
        (tdir / "a.txt").write_text("hello there .")
        manifest = tmp_path / "m.csv"
        manifest.write_text(
            "id,label,split,transcript_path,age,mmse\n"
            f"S1,case,train,{tdir / 'a.txt'},71,23\n")
        corpus = load_manifest(manifest)
        assert corpus.transcripts[0].meta == {"age": "71", "mmse": "23"}


class TestSplitView:
    def test_view_is_sorted_and_filtered(self, tmp_path):
        manifest = _write_corpus(tmp_path, [
            ("B", "case", "train", "one two ."),
            ("A", "control", "train", "three four ."),
            ("C", "case", "test", "five six ."),
        ])
        corpus = load_manifest(manifest)
        assert [t.id for t in split_view(corpus, Split.TRAIN)] == ["A", "B"]
        assert split_view(corpus, Split.VALIDATION) == []

    def test_splits_partition_the_corpus(self, tmp_path):
        from speechscreen.toydata import build_corpus
        corpus = build_corpus("toy")
        ids_by_split = [set(t.id for t in corpus.view(s)) for s in Split]
        union = set().union(*ids_by_split)
        assert union == {t.id for t in corpus.transcripts}
        for i, a in enumerate(ids_by_split):
            for b in ids_by_split[i + 1:]:
                assert not (a & b)


class TestCorpusStats:
    def test_single_transcript(self, tmp_path):
        manifest = _write_corpus(
            tmp_path, [("S1", "case", "train", "one two three four five "
                                               "six seven eight nine ten")])
        rows = corpus_stats(load_manifest(manifest))
        assert rows == [{
            "split": "train", "label": "case", "n": 1,
            "word_count_mean": 10.0, "word_count_std": 0.0,
            "word_count_min": 10, "word_count_max": 10,
            "word_count_q25": 10.0, "word_count_q50": 10.0,
            "word_count_q75": 10.0}]

    def test_sample_std_two_values(self, tmp_path):
        # words 4 and 8: mean 6, sample std (n-1) = sqrt(8) = 2.828...
        manifest = _write_corpus(tmp_path, [
            ("S1", "case", "train", "a b c d"),
            ("S2", "case", "train", "a b c d e f g h"),
        ])
        rows = corpus_stats(load_manifest(manifest))
        assert rows[0]["word_count_mean"] == 6.0
        assert rows[0]["word_count_std"] == pytest.approx(8 ** 0.5)
