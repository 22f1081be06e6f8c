import random
import string

import pytest

from sevdx.segmenter import (
    ALL_STYLES,
    MarkerStyle,
    RawReport,
    SegmenterError,
    extract_final_diagnosis,
    reconstruct,
    split_parts,
)

# 25 golden fixtures: (text, styles or None for all, expected [(part_id, body)])
GOLDEN = [
    # -- letter + dot -------------------------------------------------------
    ("A. benign breast tissue. B. fibroadenoma.", {MarkerStyle.LETTER_DOT},
     [("A", "benign breast tissue."), ("B", "fibroadenoma.")]),
    ("A. cyst\nB. fibroadenoma\nC. no tumor", None,
     [("A", "cyst"), ("B", "fibroadenoma"), ("C", "no tumor")]),
    ("A. single part only", None, [("A", "single part only")]),
    # -- letter + colon -----------------------------------------------------
    ("A: ductal carcinoma in situ\nB: benign tissue", None,
     [("A", "ductal carcinoma in situ"), ("B", "benign tissue")]),
    ("A: left breast  B: right breast", {MarkerStyle.LETTER_COLON},
     [("A", "left breast"), ("B", "right breast")]),
    # -- letter + paren -----------------------------------------------------
    ("A) apocrine metaplasia\nB) usual ductal hyperplasia", None,
     [("A", "apocrine metaplasia"), ("B", "usual ductal hyperplasia")]),
    ("A) one B) two C) three", {MarkerStyle.LETTER_PAREN},
     [("A", "one"), ("B", "two"), ("C", "three")]),
    # -- number + dot -------------------------------------------------------
    ("1. invasive ductal carcinoma\n2. lymph node negative", None,
     [("1", "invasive ductal carcinoma"), ("2", "lymph node negative")]),
    ("1. a\n2. b\n3. c\n4. d", None, [("1", "a"), ("2", "b"), ("3", "c"), ("4", "d")]),
    # -- number + colon -----------------------------------------------------
    ("1: radial scar\n2: intraductal papilloma", None,
     [("1", "radial scar"), ("2", "intraductal papilloma")]),
    # -- number + paren -----------------------------------------------------
    ("1) negative for malignancy 2) cyst", {MarkerStyle.NUM_PAREN},
     [("1", "negative for malignancy"), ("2", "cyst")]),
    ("1) alpha\n2) beta\n3) gamma", None, [("1", "alpha"), ("2", "beta"), ("3", "gamma")]),
    # -- monotonicity: chain must be strictly increasing from A / 1 ---------
    ("B. starts at B so no chain\nC. still none", None,
     [("WHOLE", "B. starts at B so no chain\nC. still none")]),
    ("2. starts at two\n3. no chain", None,
     [("WHOLE", "2. starts at two\n3. no chain")]),
    ("A. first\nA. repeated marker stays in body", None,
     [("A", "first\nA. repeated marker stays in body")]),
    ("A. first\nC. skips are allowed\nB. but no going back", None,
     [("A", "first"), ("C", "skips are allowed\nB. but no going back")]),
    ("1. one\n1. duplicate\n2. two", None,
     [("1", "one\n1. duplicate"), ("2", "two")]),
    # -- false markers inside prose ------------------------------------------
    ("seen in part A. No tumor identified.", None,
     [("WHOLE", "seen in part A. No tumor identified.")]),
    ("A. lesion measuring 3. 5 mm\nB. benign", None,
     [("A", "lesion measuring 3. 5 mm"), ("B", "benign")]),
    # -- no marker at all ----------------------------------------------------
    ("benign breast tissue with microcalcifications", None,
     [("WHOLE", "benign breast tissue with microcalcifications")]),
    ("FNA left breast: rare atypical cells", None,
     [("WHOLE", "FNA left breast: rare atypical cells")]),
    # -- marker followed by end of text --------------------------------------
    ("A. first part\nB.", None, [("A", "first part"), ("B", "")]),
    # -- style competition: earliest multi-marker chain wins ------------------
    ("A. letter chain\nB. beats the lone number 7\nhere", None,
     [("A", "letter chain"), ("B", "beats the lone number 7\nhere")]),
    ("1. number chain first\n2. then letters D. not a chain", None,
     [("1", "number chain first"), ("2", "then letters D. not a chain")]),
    # -- leading whitespace before the first marker ---------------------------
    ("  A. indented first\n  B. indented second", None,
     [("A", "indented first"), ("B", "indented second")]),
]


def test_golden_fixture_count():
    assert len(GOLDEN) == 25


@pytest.mark.parametrize("text,styles,expected", GOLDEN)
def test_golden(text, styles, expected):
    report = RawReport("r", text)
    parts = split_parts(report, styles or ALL_STYLES)
    assert [(p.part_id, p.text) for p in parts] == expected


@pytest.mark.parametrize("text,styles,expected", GOLDEN)
def test_golden_lossless(text, styles, expected):
    report = RawReport("r", text)
    parts = split_parts(report, styles or ALL_STYLES)
    assert reconstruct(text, parts) == text


def test_fuzz_losslessness_1000():
    rng = random.Random(20240817)
    alphabet = string.ascii_letters + string.digits + " \n.():%'-"
    markers = ["A. ", "B. ", "1) ", "2) ", "A: ", "1. ", "B: ", "C) "]
    for _ in range(1000):
        chunks = []
        for _ in range(rng.randint(1, 6)):
            if rng.random() < 0.5:
                chunks.append(rng.choice(markers))
            chunks.append("".join(rng.choice(alphabet) for _ in range(rng.randint(1, 30))))
        text = "".join(chunks)
        if not text.strip():
            continue
        parts = split_parts(RawReport("f", text), ALL_STYLES)
        assert reconstruct(text, parts) == text
        # bodies are substrings of the input at their spans
        for p in parts:
            s, e = p.char_span
            if p.marker_span is None:
                assert p.text == text[s:e]
            else:
                assert p.text == text[s:e].strip()


def test_empty_report_rejected():
    with pytest.raises(SegmenterError):
        RawReport("r", "")
    with pytest.raises(SegmenterError):
        split_parts(RawReport("r", "   \n  "))
    with pytest.raises(SegmenterError):
        split_parts(RawReport("r", "text"), set())


def test_section_extraction_between_headings():
    text = "FINAL DIAGNOSIS:\nA. benign tissue\nB. cyst\nCOMMENT: reviewed by staff."
    res = extract_final_diagnosis(RawReport("r", text))
    assert res.matched and not res.empty_section
    assert res.report.text == "A. benign tissue\nB. cyst\n"


def test_section_extraction_no_heading_flagged():
    res = extract_final_diagnosis(RawReport("r", "gross description only"))
    assert not res.matched
    assert "no_heading" in res.report.flags
    assert res.report.text == "gross description only"


def test_section_extraction_empty_section_flagged():
    res = extract_final_diagnosis(RawReport("r", "FINAL DIAGNOSIS:\nCOMMENT: none"))
    assert res.matched and res.empty_section
    assert "empty_section" in res.report.flags


def test_section_extraction_case_insensitive():
    res = extract_final_diagnosis(RawReport("r", "Final Pathologic Diagnosis:\nA. cyst"))
    assert res.matched
    assert res.report.text.strip() == "A. cyst"
