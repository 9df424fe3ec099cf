import json

import pytest

from viramkit.corpus import (
    BenchmarkInstance,
    ParallelCorpus,
    ParallelPair,
    PunctuationInventory,
    VariantKind,
    corpus_stats,
    dump_benchmark,
    load_benchmark,
    load_packaged_fixture,
    load_parallel_corpus,
    make_variant,
    normalize_ws,
    save_parallel_corpus,
    strip_punctuation,
    validate_instance,
)
from viramkit.errors import BenchmarkFormatError, ValidationError


# ----------------------------------------------------------------- inventory


def test_default_inventory_contents():
    inv = PunctuationInventory()
    assert {".", ",", ";", ":", "?", "!", '"', "'", "(", ")", "—", "–", "-", "/", "…"} == set(inv.marks)
    assert set(inv.intra_word_keep) == {"'", "-"}


def test_inventory_rejects_multichar_marks():
    with pytest.raises(ValidationError):
        PunctuationInventory(marks=frozenset({"--"}))


def test_inventory_keep_must_be_subset_of_marks():
    with pytest.raises(ValidationError, match="intra_word_keep"):
        PunctuationInventory(marks=frozenset({"."}), intra_word_keep=frozenset({"-"}))


def test_inventory_keep_may_be_empty():
    inv = PunctuationInventory(intra_word_keep=frozenset())
    assert strip_punctuation("well-known", inv) == "well known"


def test_without_keeps_disables_keeping_only():
    inv = PunctuationInventory().without_keeps()
    assert inv.marks == PunctuationInventory().marks
    assert inv.intra_word_keep == frozenset()


# ----------------------------------------------------------------- stripping


@pytest.mark.parametrize(
    "text,expected",
    [
        ("Hello, world!", "Hello world"),
        ("a,b", "a b"),  # replacement with space, not deletion
        ("one  two\tthree", "one two three"),
        ("well-known issue", "well-known issue"),
        ("don't stop", "don't stop"),
        ("trailing- mark", "trailing mark"),  # hyphen not flanked by letters
        ("'quoted'", "quoted"),
        ("(a b) — c…", "a b c"),
        ("co-op's door", "co-op's door"),
        ("x-1 and 1-x", "x 1 and 1 x"),  # digits do not count as letters
        ("", ""),
        ("...", ""),
    ],
)
def test_strip_punctuation_cases(text, expected):
    assert strip_punctuation(text) == expected


def test_strip_is_idempotent_on_benchmark_sentences():
    for inst in load_packaged_fixture():
        once = strip_punctuation(inst.english_meant)
        assert strip_punctuation(once) == once


def test_normalize_ws():
    assert normalize_ws("  a \t b\n c ") == "a b c"


# ----------------------------------------------------------------- instances


def _inst(**overrides):
    base = dict(
        id="x-1",
        english_written="we eat grandma",
        english_meant="we eat, grandma",
        marathi_meant="आपण जेवूया, आजी",
        punctuation_type="Comma",
    )
    base.update(overrides)
    return BenchmarkInstance(**base)


def test_validate_instance_accepts_consistent_row():
    validate_instance(_inst())


def test_validate_instance_rejects_unknown_type():
    with pytest.raises(ValidationError, match="punctuation_type"):
        validate_instance(_inst(punctuation_type="Ampersand"))


def test_validate_instance_rejects_word_change():
    with pytest.raises(ValidationError, match="more than punctuation"):
        validate_instance(_inst(english_meant="we ate, grandma"))


def test_validate_instance_rejects_empty_field():
    with pytest.raises(ValidationError, match="empty field"):
        validate_instance(_inst(marathi_meant="   "))


def test_validate_instance_allows_hyphen_ambiguity():
    # the written form lacks the hyphen the meant form keeps intra-word
    validate_instance(
        _inst(
            english_written="a man eating shark",
            english_meant="a man-eating shark",
            punctuation_type="Hyphen",
        )
    )


# ----------------------------------------------------------------- benchmark io


def test_packaged_fixture_loads():
    instances = load_packaged_fixture()
    assert [i.id for i in instances] == ["viram-001", "viram-002", "viram-003"]
    assert all("ऀ" <= ch <= "ॿ" for i in instances for ch in i.marathi_meant[:1])


def test_load_benchmark_tsv_and_jsonl_round_trip(tmp_path):
    instances = load_packaged_fixture()
    tsv = tmp_path / "bench.tsv"
    jsonl = tmp_path / "bench.jsonl"
    dump_benchmark(instances, tsv)
    dump_benchmark(instances, jsonl)
    assert load_benchmark(tsv) == instances
    assert load_benchmark(jsonl) == instances


def test_load_benchmark_bad_header(tmp_path):
    p = tmp_path / "bad.tsv"
    p.write_text("id\tsentence\n", encoding="utf-8")
    with pytest.raises(BenchmarkFormatError, match="header"):
        load_benchmark(p)


def test_load_benchmark_reports_line_number(tmp_path):
    p = tmp_path / "bad.tsv"
    good = "x-1\twe eat grandma\twe eat, grandma\tआजी\tComma"
    p.write_text(
        "id\tenglish_written\tenglish_meant\tmarathi_meant\tpunctuation_type\n"
        + good
        + "\nonly\ttwo\n",
        encoding="utf-8",
    )
    with pytest.raises(BenchmarkFormatError, match="line 3"):
        load_benchmark(p)


def test_load_benchmark_jsonl_missing_field(tmp_path):
    p = tmp_path / "bad.jsonl"
    p.write_text(json.dumps({"id": "a", "english_written": "x"}) + "\n", encoding="utf-8")
    with pytest.raises(BenchmarkFormatError, match="missing field"):
        load_benchmark(p)


def test_load_benchmark_applies_nfc(tmp_path):
    # decomposed é in the written and meant fields must normalize identically
    decomposed = "café time"
    p = tmp_path / "bench.jsonl"
    row = {
        "id": "n-1",
        "english_written": decomposed,
        "english_meant": "café, time",
        "marathi_meant": "कॅफे वेळ",
        "punctuation_type": "Comma",
    }
    p.write_text(json.dumps(row, ensure_ascii=False) + "\n", encoding="utf-8")
    (inst,) = load_benchmark(p)
    assert inst.english_written == "café time"


def test_corpus_stats_ordering():
    instances = [
        _inst(id="a", punctuation_type="Comma"),
        _inst(id="b", punctuation_type="Colon", english_meant="we eat: grandma"),
        _inst(id="c", punctuation_type="Colon", english_meant="we eat: grandma"),
    ]
    assert list(corpus_stats(instances).items()) == [("Colon", 2), ("Comma", 1)]


# ----------------------------------------------------------------- variants


@pytest.fixture
def base_corpus():
    pairs = [
        ParallelPair("First, we check.", "आधी आपण तपासतो."),
        ParallelPair("Then we act!", "मग आपण कृती करतो!"),
        ParallelPair("Done: all good.", "झाले: सर्व ठीक."),
    ]
    return ParallelCorpus("demo", VariantKind.WITH_PUNCT, pairs)


def test_with_variant_is_identity(base_corpus):
    var = make_variant(base_corpus, VariantKind.WITH_PUNCT)
    assert var.pairs == base_corpus.pairs
    assert var.variant is VariantKind.WITH_PUNCT


def test_without_variant_strips_sources_only(base_corpus):
    var = make_variant(base_corpus, VariantKind.WITHOUT_PUNCT)
    assert [p.source for p in var.pairs] == ["First we check", "Then we act", "Done all good"]
    assert [p.target for p in var.pairs] == [p.target for p in base_corpus.pairs]


def test_combined_variant_appends_stripped_copy(base_corpus):
    var = make_variant(base_corpus, VariantKind.COMBINED_2X)
    n = len(base_corpus.pairs)
    assert len(var.pairs) == 2 * n
    assert var.pairs[:n] == base_corpus.pairs
    assert [p.source for p in var.pairs[n:]] == ["First we check", "Then we act", "Done all good"]


def test_alternate_variant_strips_odd_indices(base_corpus):
    var = make_variant(base_corpus, VariantKind.ALTERNATE_X)
    assert var.pairs[0] == base_corpus.pairs[0]
    assert var.pairs[1].source == "Then we act"
    assert var.pairs[2] == base_corpus.pairs[2]


def test_variant_requires_punctuated_base(base_corpus):
    stripped = make_variant(base_corpus, VariantKind.WITHOUT_PUNCT)
    with pytest.raises(ValidationError):
        make_variant(stripped, VariantKind.COMBINED_2X)


def test_parallel_corpus_file_round_trip(tmp_path, base_corpus):
    src = tmp_path / "c.src"
    tgt = tmp_path / "c.tgt"
    src.write_text("".join(p.source + "\n" for p in base_corpus.pairs), encoding="utf-8")
    tgt.write_text("".join(p.target + "\n" for p in base_corpus.pairs), encoding="utf-8")
    loaded = load_parallel_corpus(src, tgt, name="demo")
    assert loaded.pairs == base_corpus.pairs

    meta_path = save_parallel_corpus(loaded, tmp_path / "out")
    meta = json.loads(meta_path.read_text(encoding="utf-8"))
    assert meta == {"base": "demo", "variant": "with", "pairs": 3}
    again = load_parallel_corpus(
        meta_path.with_name("demo.with.src"), meta_path.with_name("demo.with.tgt"), name="demo"
    )
    assert again.pairs == base_corpus.pairs


def test_parallel_corpus_misalignment_rejected(tmp_path):
    (tmp_path / "a.src").write_text("one\ntwo\n", encoding="utf-8")
    (tmp_path / "a.tgt").write_text("एक\n", encoding="utf-8")
    with pytest.raises(ValidationError, match="misaligned"):
        load_parallel_corpus(tmp_path / "a.src", tmp_path / "a.tgt")
