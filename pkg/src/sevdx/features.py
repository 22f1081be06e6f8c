"""Feature backends: native tf-idf vectors and an external embedding provider.

tf-idf uses raw term counts with smoothed idf ln((1+N)/(1+df)) + 1 and L2
document normalization; the exact variant is recorded in the model bundle so
results stay reproducible. The embedding provider stands in for transformer
inference behind a small HTTP contract and is never executed locally.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import requests

from .textprep import TokenStream


class FeatureError(ValueError):
    pass


class ProviderError(RuntimeError):
    """Retriable failure of the external embedding provider."""


@dataclass(frozen=True)
class SparseVector:
    indices: tuple[int, ...]
    values: tuple[float, ...]
    dim: int

    def __post_init__(self):
        if len(self.indices) != len(self.values):
            raise FeatureError("indices and values must be parallel")
        if any(b <= a for a, b in zip(self.indices, self.indices[1:])):
            raise FeatureError("indices must be strictly increasing")
        if self.indices and self.indices[-1] >= self.dim:
            raise FeatureError("index out of range")
        if any(not math.isfinite(v) or v == 0.0 for v in self.values):
            raise FeatureError("values must be finite and non-zero")

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.dim)
        if self.indices:
            out[list(self.indices)] = self.values
        return out

    def l2_norm(self) -> float:
        return math.sqrt(sum(v * v for v in self.values))


@dataclass(frozen=True)
class DenseVector:
    values: tuple[float, ...]
    dim: int = 768

    def __post_init__(self):
        if len(self.values) != self.dim:
            raise FeatureError("dense vector length must equal dim")
        if any(not math.isfinite(v) for v in self.values):
            raise FeatureError("dense vector values must be finite")

    def to_dense(self) -> np.ndarray:
        return np.asarray(self.values)


@dataclass(frozen=True)
class TfidfModel:
    vocabulary: dict[str, int]
    idf: tuple[float, ...]
    sublinear_tf: bool = False
    smooth_idf: bool = True
    l2_normalize: bool = True

    @property
    def dim(self) -> int:
        return len(self.vocabulary)

    def to_dict(self) -> dict:
        # vocabulary serialized as the index-ordered token list
        inverse = sorted(self.vocabulary, key=self.vocabulary.get)
        return {
            "tokens": inverse,
            "idf": list(self.idf),
            "sublinear_tf": self.sublinear_tf,
            "smooth_idf": self.smooth_idf,
            "l2_normalize": self.l2_normalize,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TfidfModel":
        return cls(
            vocabulary={t: i for i, t in enumerate(d["tokens"])},
            idf=tuple(d["idf"]),
            sublinear_tf=d["sublinear_tf"],
            smooth_idf=d["smooth_idf"],
            l2_normalize=d["l2_normalize"],
        )


def tfidf_fit(corpus: list[TokenStream]) -> TfidfModel:
    """Fit vocabulary and idf weights on a (masked) token-stream corpus."""
    if not corpus:
        raise FeatureError("corpus must be non-empty")
    n_docs = len(corpus)
    df: dict[str, int] = {}
    for stream in corpus:
        for tok in set(stream.tokens):
            df[tok] = df.get(tok, 0) + 1
    vocabulary = {tok: i for i, tok in enumerate(sorted(df))}
    idf = [0.0] * len(vocabulary)
    for tok, i in vocabulary.items():
        idf[i] = math.log((1 + n_docs) / (1 + df[tok])) + 1.0
    return TfidfModel(vocabulary=vocabulary, idf=tuple(idf))


def tfidf_transform(model: TfidfModel, stream: TokenStream) -> SparseVector:
    counts: dict[int, int] = {}
    for tok in stream.tokens:
        idx = model.vocabulary.get(tok)
        if idx is not None:
            counts[idx] = counts.get(idx, 0) + 1
    if not counts:
        return SparseVector(indices=(), values=(), dim=model.dim)
    indices = sorted(counts)
    values = []
    for i in indices:
        tf = 1.0 + math.log(counts[i]) if model.sublinear_tf else float(counts[i])
        values.append(tf * model.idf[i])
    if model.l2_normalize:
        norm = math.sqrt(sum(v * v for v in values))
        values = [v / norm for v in values]
    return SparseVector(indices=tuple(indices), values=tuple(values), dim=model.dim)


def tfidf_transform_many(model: TfidfModel, streams: list[TokenStream]) -> list[SparseVector]:
    return [tfidf_transform(model, s) for s in streams]


def to_matrix(vectors: list[SparseVector | DenseVector]) -> np.ndarray:
    """Stack feature vectors into a dense (n, dim) matrix."""
    if not vectors:
        raise FeatureError("no vectors to stack")
    dims = {v.dim for v in vectors}
    if len(dims) != 1:
        raise FeatureError(f"inconsistent feature dimensions: {sorted(dims)}")
    return np.vstack([v.to_dense() for v in vectors])


# Documentation-only record of the upstream fine-tuning recipe the provider
# is expected to have applied; nothing here is executed locally.
PROVIDER_FINETUNE_DOC = {
    "learning_rate": 2e-5,
    "max_sequence_length": 64,
    "batch_size": 32,
    "early_stopping_patience_epochs": 10,
    "frozen_layers": ["embedding"],
    "loss": "weighted binary cross-entropy",
}


@dataclass(frozen=True)
class EmbedProviderConfig:
    endpoint: str
    dim: int = 768
    timeout: float = 30.0
    batch_size: int = 32
    finetune_doc: dict = field(default_factory=lambda: dict(PROVIDER_FINETUNE_DOC))

    def __post_init__(self):
        if self.dim <= 0:
            raise FeatureError("dim must be positive")
        if self.batch_size <= 0:
            raise FeatureError("batch_size must be positive")


def embed(cfg: EmbedProviderConfig, texts: list[str], session=None) -> list[DenseVector]:
    """Fetch one embedding per text, chunked by batch_size, order preserved.

    All-or-error: any transport failure, non-200 response or dimension
    mismatch raises ProviderError; partial results are never returned.
    """
    if not texts:
        return []
    http = session or requests
    out: list[DenseVector] = []
    for start in range(0, len(texts), cfg.batch_size):
        chunk = texts[start : start + cfg.batch_size]
        try:
            resp = http.post(
                cfg.endpoint.rstrip("/") + "/embed",
                json={"texts": chunk},
                timeout=cfg.timeout,
            )
        except requests.RequestException as exc:
            raise ProviderError(f"embedding provider unreachable: {exc}") from exc
        if resp.status_code != 200:
            detail = ""
            try:
                detail = resp.json().get("error", "")
            except Exception:
                pass
            raise ProviderError(f"provider returned {resp.status_code}: {detail}")
        body = resp.json()
        vectors = body.get("embeddings")
        if body.get("dim") != cfg.dim or vectors is None or len(vectors) != len(chunk):
            raise ProviderError(
                f"provider response mismatch: dim={body.get('dim')} "
                f"n={len(vectors) if vectors is not None else 0}, expected dim={cfg.dim} n={len(chunk)}"
            )
        for vec in vectors:
            if len(vec) != cfg.dim:
                raise ProviderError("embedding length differs from declared dim")
            out.append(DenseVector(values=tuple(float(x) for x in vec), dim=cfg.dim))
    return out
