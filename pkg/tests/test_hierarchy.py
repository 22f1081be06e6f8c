import json
import warnings

import numpy as np
import pytest

from sevdx import corpusio
from sevdx.hierarchy import (
    HierarchyError,
    TrainSettings,
    derive_gold_severities,
    train_flat,
    train_hierarchical,
)
from sevdx.learners import ForestConfig
from sevdx.ontology import NEGATIVE


def test_derive_gold_severities(ont):
    assert derive_gold_severities(set(), ont) == {NEGATIVE}
    assert derive_gold_severities({"cyst"}, ont) == {"B"}
    assert derive_gold_severities({"cyst", "invasive ductal carcinoma"}, ont) == {"B", "IBC"}


def test_routing_soundness_on_1000_predictions(ont, hier_model, small_corpus):
    rng = np.random.default_rng(20240823)
    base_texts = [p.text for p in small_corpus]
    texts = [base_texts[i] for i in rng.integers(0, len(base_texts), 1000)]
    preds = hier_model.predict_many(texts)
    assert len(preds) == 1000
    for pred in preds:
        sevs = pred.severity_codes()
        for name, prob, sev in pred.diagnoses:
            # a diagnosis can only come from a predicted severity's own branch
            assert sev in sevs
            assert ont.severity_of(name) == sev
            assert 0.0 <= prob <= 1.0
        if sevs == {NEGATIVE}:
            assert pred.diagnoses == ()
        assert pred.no_prediction == (not sevs)


def test_hierarchical_matches_brute_force_routed_reference(ont, hier_model, small_corpus):
    texts = [p.text for p in small_corpus[:50]]
    preds = hier_model.predict_many(texts)
    s1_probs = hier_model.stage1.predict_proba_texts(texts)
    for i, text in enumerate(texts):
        sev_hits = []
        for code, p in zip(hier_model.stage1.label_names, s1_probs[i]):
            thr = hier_model.stage1.thresholds.get(code, hier_model.settings.severity_threshold)
            if p >= thr:
                sev_hits.append((code, float(p)))
        expected_diag = []
        for code, _ in sev_hits:
            branch = hier_model.branches.get(code)
            if code == NEGATIVE or branch is None:
                continue
            row = branch.predict_proba_texts([text])[0]
            for name, bp in zip(branch.label_names, row):
                thr = branch.thresholds.get(name, hier_model.settings.branch_threshold)
                if bp >= thr:
                    expected_diag.append((name, float(bp), code))
        assert preds[i].severities == tuple(sev_hits)
        assert sorted(preds[i].diagnoses) == sorted(expected_diag)
        assert preds[i].no_prediction == (not sev_hits)


def test_branch_isolation_out_of_branch_rows_do_not_change_branch(ont):
    cfg = corpusio.SynthConfig(
        seed=5, n_parts=300,
        label_priors={"cyst": 0.3, "fibroadenoma": 0.2, "invasive ductal carcinoma": 0.25},
    )
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        parts = corpusio.generate_synth(cfg, ont)
        settings = TrainSettings(forest=ForestConfig(n_trees=3, max_depth=8), seed=0)
        model_a = train_hierarchical(parts, ont, settings)

        # perturb only rows that do not carry any Benign diagnosis
        perturbed = [
            p if any(ont.severity_of(d) == "B" for d in p.gold_diagnoses)
            else corpusio.LabeledPart(p.report_id, p.part_id, p.text + " extra words here", p.gold_diagnoses)
            for p in parts
        ]
        assert perturbed != parts
        model_b = train_hierarchical(perturbed, ont, settings)

    dump_a = json.dumps(model_a.branches["B"].to_dict(), sort_keys=True)
    dump_b = json.dumps(model_b.branches["B"].to_dict(), sort_keys=True)
    assert dump_a == dump_b
    # sanity: stage 1 saw the perturbation
    s1_a = json.dumps(model_a.stage1.to_dict(), sort_keys=True)
    s1_b = json.dumps(model_b.stage1.to_dict(), sort_keys=True)
    assert s1_a != s1_b


def test_training_is_seed_deterministic(ont):
    cfg = corpusio.SynthConfig(seed=2, n_parts=150,
                               label_priors={"cyst": 0.3, "radial scar": 0.2})
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        parts = corpusio.generate_synth(cfg, ont)
        settings = TrainSettings(forest=ForestConfig(n_trees=2, max_depth=6), seed=9)
        a = train_hierarchical(parts, ont, settings)
        b = train_hierarchical(parts, ont, settings)
    assert json.dumps(a.to_dict(), sort_keys=True) == json.dumps(b.to_dict(), sort_keys=True)


def test_small_branch_becomes_constant_negative(ont):
    # only one part carries an ISC diagnosis: that branch cannot be fit
    parts = []
    for i in range(40):
        parts.append(corpusio.LabeledPart(f"r{i}", "A", f"cystic fluid sample cyst {i % 7}", ("cyst",)))
    parts.append(corpusio.LabeledPart("risc", "A", "in situ lesion", ("ductal carcinoma in situ",)))
    settings = TrainSettings(forest=ForestConfig(n_trees=2, max_depth=4), seed=0)
    with pytest.warns(UserWarning, match="ISC"):
        model = train_hierarchical(parts, ont, settings)
    assert model.branches["ISC"] is None
    assert any("ISC" in w for w in model.training_report["warnings"])


def test_flat_model_label_space_is_diagnoses_plus_negative(ont, flat_model):
    assert flat_model.stage.label_names == tuple(ont.diagnosis_names + [NEGATIVE])


def test_unknown_gold_label_rejected(ont):
    parts = [corpusio.LabeledPart("r", "A", "text", ("no such label",))] * 3
    with pytest.raises(HierarchyError):
        train_hierarchical(list(parts), ont)
    with pytest.raises(HierarchyError):
        train_flat(list(parts), ont)
    with pytest.raises(HierarchyError):
        train_hierarchical([], ont)


def test_settings_validation():
    with pytest.raises(HierarchyError):
        TrainSettings(classifier="svm")
    with pytest.raises(HierarchyError):
        TrainSettings(stage1_backend="embed")  # embed requires embed_cfg
