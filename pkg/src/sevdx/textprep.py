"""Domain text normalization, tokenization and rare-word masking.

Numbers, percent signs, math symbols and tumor clock positions are rewritten
to word forms before tokenization; rare tokens are folded into a single
unknown-word token so the classical feature backends see a stable vocabulary.
Stemming and stopword removal are skipped when feeding the external embedding
provider, which expects raw text.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources

from . import _porter

_UNITS = [
    "zero", "one", "two", "three", "four", "five", "six", "seven", "eight",
    "nine", "ten", "eleven", "twelve", "thirteen", "fourteen", "fifteen",
    "sixteen", "seventeen", "eighteen", "nineteen",
]
_TENS = [
    "", "", "twenty", "thirty", "forty", "fifty", "sixty", "seventy",
    "eighty", "ninety",
]

# private-use sentinel guards clock phrases from number verbalization
_CLK_SENTINEL = ""

_CLOCK_COLON_RE = re.compile(r"\b(0?[1-9]|1[0-2]):00\b")
_CLOCK_WORD_RE = re.compile(r"\b(0?[1-9]|1[0-2])\s*o\s*'?\s*clock\b", re.IGNORECASE)
_DECIMAL_RE = re.compile(r"(?<![A-Za-z0-9])(\d+)\.(\d+)(?![A-Za-z0-9])")
_INTEGER_RE = re.compile(r"(?<![A-Za-z0-9])(\d+)(?![A-Za-z0-9])")

_SYMBOLS = [
    ("%", " percentage "),
    ("+", " plus "),
    ("-", " minus "),
    ("<", " less than "),
    (">", " greater than "),
    ("=", " equals "),
]


def _load_stopwords() -> frozenset[str]:
    text = resources.files("sevdx.data").joinpath("stopwords.txt").read_text(encoding="utf-8")
    return frozenset(line.strip() for line in text.splitlines() if line.strip())


DEFAULT_STOPWORDS = _load_stopwords()


@dataclass(frozen=True)
class PrepConfig:
    lowercase: bool = True
    remove_stopwords: bool = True
    stopword_list: frozenset[str] = DEFAULT_STOPWORDS
    min_token_count: int = 5
    unknown_token: str = "unknown_word"
    verbalize_numbers: bool = True
    normalize_clock: bool = True
    stem: bool = True

    def __post_init__(self):
        if self.min_token_count < 1:
            raise ValueError("min_token_count must be >= 1")
        if not self.unknown_token:
            raise ValueError("unknown_token must be non-empty")

    @classmethod
    def for_embedding_provider(cls) -> "PrepConfig":
        """Raw splitter mode: pre-trained backends bring their own vocabulary."""
        return cls(
            remove_stopwords=False,
            verbalize_numbers=False,
            normalize_clock=False,
            stem=False,
            min_token_count=1,
        )

    def to_dict(self) -> dict:
        return {
            "lowercase": self.lowercase,
            "remove_stopwords": self.remove_stopwords,
            "stopword_list": sorted(self.stopword_list),
            "min_token_count": self.min_token_count,
            "unknown_token": self.unknown_token,
            "verbalize_numbers": self.verbalize_numbers,
            "normalize_clock": self.normalize_clock,
            "stem": self.stem,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PrepConfig":
        d = dict(d)
        d["stopword_list"] = frozenset(d.get("stopword_list", DEFAULT_STOPWORDS))
        return cls(**d)


@dataclass(frozen=True)
class TokenStream:
    tokens: tuple[str, ...]
    source_part: object | None = None


def number_to_words(n: int) -> str:
    """English words for 0..9999, space separated ("34" -> "thirty four")."""
    if n < 0 or n > 9999:
        raise ValueError("number_to_words covers 0..9999")
    if n < 20:
        return _UNITS[n]
    if n < 100:
        tens, rem = divmod(n, 10)
        return _TENS[tens] + (f" {_UNITS[rem]}" if rem else "")
    if n < 1000:
        hundreds, rem = divmod(n, 100)
        return f"{_UNITS[hundreds]} hundred" + (f" {number_to_words(rem)}" if rem else "")
    thousands, rem = divmod(n, 1000)
    return f"{_UNITS[thousands]} thousand" + (f" {number_to_words(rem)}" if rem else "")


def _verbalize_integer(digits: str) -> str:
    n = int(digits)
    if n <= 9999:
        return number_to_words(n)
    return " ".join(_UNITS[int(d)] for d in digits)


def _digitwise(digits: str) -> str:
    return " ".join(_UNITS[int(d)] for d in digits)


def normalize(text: str, cfg: PrepConfig = PrepConfig()) -> str:
    out = text.replace(_CLK_SENTINEL, "")
    clocks: list[str] = []

    def _stash(m: re.Match) -> str:
        clocks.append(f"{int(m.group(1))} o' clock")
        return _CLK_SENTINEL

    if cfg.normalize_clock:
        out = _CLOCK_COLON_RE.sub(_stash, out)
        out = _CLOCK_WORD_RE.sub(_stash, out)
    for sym, word in _SYMBOLS:
        out = out.replace(sym, word)
    if cfg.verbalize_numbers:
        out = _DECIMAL_RE.sub(
            lambda m: f"{_verbalize_integer(m.group(1))} point {_digitwise(m.group(2))}", out
        )
        out = _INTEGER_RE.sub(lambda m: _verbalize_integer(m.group(1)), out)
    for phrase in clocks:
        out = out.replace(_CLK_SENTINEL, phrase, 1)
    return re.sub(r"\s+", " ", out).strip()


_TOKEN_RE = re.compile(r"[A-Za-z0-9_']+")


def tokenize(text: str, cfg: PrepConfig = PrepConfig(), source_part=None) -> TokenStream:
    tokens = []
    for raw in _TOKEN_RE.findall(text):
        tok = raw.strip("'")
        if not tok:
            continue
        if cfg.lowercase:
            tok = tok.lower()
        if cfg.remove_stopwords and tok in cfg.stopword_list:
            continue
        if cfg.stem:
            tok = _porter.stem(tok)
        tokens.append(tok)
    return TokenStream(tokens=tuple(tokens), source_part=source_part)


def prepare(text: str, cfg: PrepConfig = PrepConfig(), source_part=None) -> TokenStream:
    return tokenize(normalize(text, cfg), cfg, source_part=source_part)


@dataclass(frozen=True)
class VocabMask:
    retained: frozenset[str]
    unknown_token: str = "unknown_word"

    def apply(self, stream: TokenStream) -> TokenStream:
        return TokenStream(
            tokens=tuple(t if t in self.retained else self.unknown_token for t in stream.tokens),
            source_part=stream.source_part,
        )

    def to_dict(self) -> dict:
        return {"retained": sorted(self.retained), "unknown_token": self.unknown_token}

    @classmethod
    def from_dict(cls, d: dict) -> "VocabMask":
        return cls(retained=frozenset(d["retained"]), unknown_token=d["unknown_token"])


def fit_vocab_mask(corpus: list[TokenStream], cfg: PrepConfig = PrepConfig()) -> VocabMask:
    """Retain tokens with corpus frequency >= min_token_count.

    Frequency is counted over the whole corpus (not per report). The mask is
    applied identically at train and inference time.
    """
    if not corpus:
        raise ValueError("corpus must be non-empty")
    counts = Counter(t for stream in corpus for t in stream.tokens)
    retained = frozenset(t for t, c in counts.items() if c >= cfg.min_token_count)
    return VocabMask(retained=retained, unknown_token=cfg.unknown_token)
