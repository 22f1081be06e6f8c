import json
import warnings

import numpy as np
import pytest

from sevdx import corpusio
from sevdx.corpusio import (
    BundleError,
    CorpusError,
    LabeledPart,
    SynthConfig,
    generate_synth,
    load_bundle,
    read_corpus_jsonl,
    read_corpus_text,
    save_bundle,
    write_corpus_text,
)
from sevdx.ontology import with_filler_labels

# ---------------------------------------------------------------------------
# corpus files


def test_write_read_identity(ont):
    parts = [
        LabeledPart("r1", "A", "benign breast tissue", ("cyst",)),
        LabeledPart("r1", "B", 'text with "quotes", commas\nand a newline', ("cyst", "fibroadenoma")),
        LabeledPart("r2", "WHOLE", "negative for malignancy", ()),
    ]
    assert read_corpus_text(write_corpus_text(parts), ont) == parts


def test_bad_header_rejected(ont):
    with pytest.raises(CorpusError, match="header"):
        read_corpus_text("a,b,c,d\n1,2,3,4\n", ont)


def test_unknown_label_rejected_with_line_number(ont):
    text = 'report_id,part_id,text,labels\nr1,A,hello,not a label\n'
    with pytest.raises(CorpusError, match="line 2"):
        read_corpus_text(text, ont)


def test_duplicate_part_rejected(ont):
    text = "report_id,part_id,text,labels\nr1,A,x,\nr1,A,y,\n"
    with pytest.raises(CorpusError, match="duplicate"):
        read_corpus_text(text, ont)


def test_empty_labels_field_means_negative(ont):
    text = "report_id,part_id,text,labels\nr1,A,negative specimen,\n"
    parts = read_corpus_text(text, ont)
    assert parts[0].gold_diagnoses == ()


def test_jsonl_round_trip(ont):
    lines = "\n".join([
        json.dumps({"report_id": "r1", "part_id": "A", "text": "hi", "labels": ["cyst"]}),
        json.dumps({"text": "defaults applied"}),
    ])
    parts = read_corpus_jsonl(lines, ont)
    assert parts[0].gold_diagnoses == ("cyst",)
    assert parts[1].report_id == "2" and parts[1].part_id == "WHOLE"
    with pytest.raises(CorpusError, match="line 1"):
        read_corpus_jsonl("{bad json", ont)


# ---------------------------------------------------------------------------
# synthetic corpus


def _priors(ont, k=6, p=0.12):
    return {name: p for name in ont.diagnosis_names[:k]}


def test_synth_is_seeded_and_deterministic(ont):
    cfg = SynthConfig(seed=42, n_parts=50, label_priors=_priors(ont))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        a = generate_synth(cfg, ont)
        b = generate_synth(cfg, ont)
    assert a == b
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        c = generate_synth(SynthConfig(seed=43, n_parts=50, label_priors=_priors(ont)), ont)
    assert c != a


def test_synth_marginals_match_priors_within_3_sigma(ont):
    # co-occurrence off: each label is an independent Bernoulli draw
    n = 4000
    priors = _priors(ont, k=5, p=0.15)
    cfg = SynthConfig(seed=7, n_parts=n, label_priors=priors, co_occurrence_rate=0.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        parts = generate_synth(cfg, ont)
    for lab, p in priors.items():
        count = sum(lab in prt.gold_diagnoses for prt in parts)
        sigma = (n * p * (1 - p)) ** 0.5
        assert abs(count - n * p) <= 3 * sigma, lab


def test_synth_signal_terms_present_at_zero_noise(ont):
    labels = list(_priors(ont, k=4))
    signals = {lab: [f"sig{i}a", f"sig{i}b"] for i, lab in enumerate(labels)}
    cfg = SynthConfig(seed=3, n_parts=200, label_priors={l: 0.2 for l in labels},
                      signal_terms=signals, noise_rate=0.0)
    parts = generate_synth(cfg, ont)
    assert any(p.gold_diagnoses for p in parts)
    for part in parts:
        for lab in part.gold_diagnoses:
            for term in signals[lab]:
                assert term in part.text
        if not part.gold_diagnoses:
            assert "negative for malignancy" in part.text


def test_synth_co_occurrence_adds_second_label(ont):
    labels = list(_priors(ont, k=4))
    base = SynthConfig(seed=11, n_parts=2000, label_priors={l: 0.1 for l in labels},
                       co_occurrence_rate=0.0)
    boosted = SynthConfig(seed=11, n_parts=2000, label_priors={l: 0.1 for l in labels},
                          co_occurrence_rate=1.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        singles_base = sum(len(p.gold_diagnoses) == 1 for p in generate_synth(base, ont))
        singles_boost = sum(len(p.gold_diagnoses) == 1 for p in generate_synth(boosted, ont))
    assert singles_base > 0
    assert singles_boost == 0  # every single-label part gained a co-occurring label


def test_synth_rejects_bad_config(ont):
    with pytest.raises(CorpusError):
        SynthConfig(label_priors={"cyst": 0.0})
    with pytest.raises(CorpusError):
        SynthConfig(label_priors={"cyst": 0.5}, noise_rate=2.0)
    with pytest.raises(CorpusError):
        generate_synth(SynthConfig(label_priors={"unknown": 0.5}), ont)
    with pytest.raises(CorpusError):
        generate_synth(SynthConfig(label_priors={}), ont)


def test_overlapping_signal_terms_warn(ont):
    labels = list(_priors(ont, k=2))
    signals = {labels[0]: ["shared"], labels[1]: ["shared"]}
    cfg = SynthConfig(seed=1, n_parts=5, label_priors={l: 0.5 for l in labels},
                      signal_terms=signals)
    with pytest.warns(UserWarning, match="shared"):
        generate_synth(cfg, ont)


# ---------------------------------------------------------------------------
# bundles


def test_bundle_round_trip_hierarchical(ont, small_corpus, hier_model, tmp_path):
    save_bundle(hier_model, tmp_path / "bundle")
    again = load_bundle(tmp_path / "bundle", ont)
    texts = [p.text for p in small_corpus[:25]]
    assert again.predict_many(texts) == hier_model.predict_many(texts)


def test_bundle_round_trip_flat(ont, small_corpus, flat_model, tmp_path):
    save_bundle(flat_model, tmp_path / "bundle")
    again = load_bundle(tmp_path / "bundle", ont)
    texts = [p.text for p in small_corpus[:25]]
    assert again.predict_label_sets(texts) == flat_model.predict_label_sets(texts)


def test_bundle_tamper_detected(ont, hier_model, tmp_path):
    path = save_bundle(hier_model, tmp_path / "bundle")
    target = path / "stage1" / "model.json"
    target.write_bytes(target.read_bytes() + b" ")
    with pytest.raises(BundleError, match="hash"):
        load_bundle(path, ont)


def test_bundle_version_mismatch_rejected(ont, hier_model, tmp_path):
    path = save_bundle(hier_model, tmp_path / "bundle")
    manifest = json.loads((path / "manifest.json").read_text())
    manifest["engine_version"] = "9.9.9"
    (path / "manifest.json").write_text(json.dumps(manifest))
    with pytest.raises(BundleError, match="engine"):
        load_bundle(path, ont)
    manifest["engine_version"] = corpusio.ENGINE_VERSION
    manifest["bundle_format"] = 99
    (path / "manifest.json").write_text(json.dumps(manifest))
    with pytest.raises(BundleError, match="format"):
        load_bundle(path, ont)


def test_bundle_ontology_mismatch_rejected(ont, hier_model, tmp_path):
    path = save_bundle(hier_model, tmp_path / "bundle")
    other = with_filler_labels(ont, len(ont.diagnoses) + 2)
    with pytest.raises(BundleError, match="ontology"):
        load_bundle(path, other)


def test_bundle_missing_manifest(ont, tmp_path):
    with pytest.raises(BundleError, match="manifest"):
        load_bundle(tmp_path, ont)


def test_bundle_floats_round_trip_bit_exactly(hier_model, tmp_path, ont):
    path = save_bundle(hier_model, tmp_path / "bundle")
    again = load_bundle(path, ont)
    a = hier_model.stage1.classifier.to_dict()
    b = again.stage1.classifier.to_dict()
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)
