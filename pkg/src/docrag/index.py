"""In-memory vector index: exact filtered top-k cosine retrieval.

A deliberate non-ANN design: corpora here are thousands of chunks, and a
full scan is both fast enough and oracle-testable. Readers work on
immutable snapshots; writers are serialized, so concurrent searches see a
consistent index. Persistence is JSON-lines with a header line, written
atomically.
"""

from __future__ import annotations

import json
import logging
import math
import os
import tempfile
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .chunking import ChunkMetadata, DocumentChunk
from .embedding import EmbeddingVector
from .errors import IndexLoadError, ProviderError
from .providers import EmbeddingProvider
from .tokens import DEFAULT_TOKENIZER

logger = logging.getLogger(__name__)

DEFAULT_K = 3


def embed(text: str, provider: EmbeddingProvider) -> EmbeddingVector:
    """Embed text through a provider, validating the returned vector."""
    vector = provider.embed(text)
    if len(vector) != provider.dimension:
        raise ProviderError(
            f"dimension mismatch: provider {provider.tag} declared {provider.dimension}, "
            f"returned {len(vector)}"
        )
    if not all(math.isfinite(v) for v in vector):
        raise ProviderError(f"provider {provider.tag} returned non-finite values")
    return vector


def cosine(u: Sequence[float], v: Sequence[float]) -> float:
    """Cosine similarity; an all-zero vector scores 0 and is flagged."""
    if len(u) != len(v):
        raise ValueError(f"dimension mismatch: {len(u)} vs {len(v)}")
    dot = sum(a * b for a, b in zip(u, v))
    norm_u = math.sqrt(sum(a * a for a in u))
    norm_v = math.sqrt(sum(b * b for b in v))
    if norm_u == 0.0 or norm_v == 0.0:
        logger.warning("cosine against an all-zero vector; scoring 0")
        return 0.0
    return dot / (norm_u * norm_v)


@dataclass(frozen=True)
class IndexEntry:
    chunk: DocumentChunk
    vector: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "vector", tuple(float(v) for v in self.vector))
        if not all(math.isfinite(v) for v in self.vector):
            raise ValueError("vector entries must be finite")


@dataclass(frozen=True)
class RetrievalConfig:
    k: int = DEFAULT_K
    filters: tuple[tuple[str, object], ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        object.__setattr__(self, "filters", tuple((f, v) for f, v in self.filters))


@dataclass(frozen=True)
class RetrievalResult:
    chunk: DocumentChunk
    score: float


# Snapshot shared by concurrent readers; replaced wholesale on writes.
@dataclass(frozen=True)
class _Snapshot:
    ids: tuple[str, ...]
    entries: dict[str, IndexEntry]
    matrix: np.ndarray
    norms: np.ndarray


class VectorIndex:
    def __init__(
        self,
        dimension: int,
        tokenizer_tag: str = DEFAULT_TOKENIZER.tag,
        provider_tag: str = "",
    ):
        if dimension < 1:
            raise ValueError("dimension must be >= 1")
        self.dimension = dimension
        self.tokenizer_tag = tokenizer_tag
        self.provider_tag = provider_tag
        self._write_lock = threading.Lock()
        self._snapshot = _Snapshot(
            ids=(),
            entries={},
            matrix=np.empty((0, dimension), dtype=np.float64),
            norms=np.empty((0,), dtype=np.float64),
        )

    def __len__(self) -> int:
        return len(self._snapshot.ids)

    def chunk_ids(self) -> tuple[str, ...]:
        return self._snapshot.ids

    def get(self, chunk_id: str) -> IndexEntry | None:
        return self._snapshot.entries.get(chunk_id)

    def upsert(self, entry: IndexEntry) -> None:
        """Store an entry; a repeated chunk_id replaces the prior entry."""
        if len(entry.vector) != self.dimension:
            raise ValueError(
                f"dimension mismatch: index is {self.dimension}, vector is {len(entry.vector)}"
            )
        with self._write_lock:
            entries = dict(self._snapshot.entries)
            entries[entry.chunk.chunk_id] = entry
            self._publish(entries)

    def upsert_many(self, entries: Sequence[IndexEntry]) -> None:
        for entry in entries:
            if len(entry.vector) != self.dimension:
                raise ValueError(
                    f"dimension mismatch: index is {self.dimension}, "
                    f"vector is {len(entry.vector)}"
                )
        with self._write_lock:
            merged = dict(self._snapshot.entries)
            for entry in entries:
                merged[entry.chunk.chunk_id] = entry
            self._publish(merged)

    def _publish(self, entries: dict[str, IndexEntry]) -> None:
        ids = tuple(sorted(entries))
        if ids:
            matrix = np.array([entries[i].vector for i in ids], dtype=np.float64)
        else:
            matrix = np.empty((0, self.dimension), dtype=np.float64)
        norms = np.linalg.norm(matrix, axis=1)
        self._snapshot = _Snapshot(ids=ids, entries=entries, matrix=matrix, norms=norms)

    def search(self, query_vector: Sequence[float], config: RetrievalConfig) -> list[RetrievalResult]:
        """Exact top-k by cosine among entries passing every metadata filter.

        Results sort by descending score, ties by ascending chunk_id. An
        empty index (or one emptied by the filters) yields no results.
        """
        if len(query_vector) != self.dimension:
            raise ValueError(
                f"dimension mismatch: index is {self.dimension}, query is {len(query_vector)}"
            )
        snapshot = self._snapshot
        if not snapshot.ids:
            return []

        keep = []
        for position, chunk_id in enumerate(snapshot.ids):
            metadata = snapshot.entries[chunk_id].chunk.metadata.as_dict()
            if all(metadata.get(name) == value for name, value in config.filters):
                keep.append(position)
        if not keep:
            return []

        query = np.asarray(query_vector, dtype=np.float64)
        query_norm = float(np.linalg.norm(query))
        rows = snapshot.matrix[keep]
        norms = snapshot.norms[keep]
        if query_norm == 0.0:
            logger.warning("search with an all-zero query vector; all scores 0")
            scores = np.zeros(len(keep))
        else:
            zero_rows = norms == 0.0
            if zero_rows.any():
                logger.warning("%d all-zero vectors in index scored 0", int(zero_rows.sum()))
            safe_norms = np.where(zero_rows, 1.0, norms)
            scores = (rows @ query) / (safe_norms * query_norm)
            scores[zero_rows] = 0.0

        ranked = sorted(
            range(len(keep)),
            key=lambda i: (-scores[i], snapshot.ids[keep[i]]),
        )
        results = []
        for i in ranked[: config.k]:
            chunk_id = snapshot.ids[keep[i]]
            results.append(
                RetrievalResult(chunk=snapshot.entries[chunk_id].chunk, score=float(scores[i]))
            )
        return results

    def persist(self, path: str | Path) -> None:
        """Write the index as JSON-lines, atomically (temp file + rename)."""
        path = Path(path)
        snapshot = self._snapshot
        header = {
            "dimension": self.dimension,
            "count": len(snapshot.ids),
            "tokenizer": self.tokenizer_tag,
            "provider": self.provider_tag,
        }
        descriptor, temp_name = tempfile.mkstemp(
            dir=path.parent or Path("."), prefix=path.name, suffix=".tmp"
        )
        try:
            with os.fdopen(descriptor, "w", encoding="utf-8") as handle:
                handle.write(json.dumps(header, ensure_ascii=False) + "\n")
                for chunk_id in snapshot.ids:
                    entry = snapshot.entries[chunk_id]
                    record = {
                        "chunk_id": chunk_id,
                        "text": entry.chunk.text,
                        "token_count": entry.chunk.token_count,
                        "metadata": entry.chunk.metadata.as_dict(),
                        "vector": list(entry.vector),
                    }
                    handle.write(json.dumps(record, ensure_ascii=False) + "\n")
            os.replace(temp_name, path)
        except BaseException:
            if os.path.exists(temp_name):
                os.unlink(temp_name)
            raise

    @classmethod
    def load(cls, path: str | Path) -> "VectorIndex":
        """Read a persisted index; corruption errors carry a byte offset."""
        with open(path, "rb") as handle:
            raw_header = handle.readline()
            try:
                header = json.loads(raw_header.decode("utf-8"))
                dimension = int(header["dimension"])
                count = int(header["count"])
            except (ValueError, KeyError, TypeError) as exc:
                raise IndexLoadError(0, f"bad header line: {exc}") from exc
            index = cls(
                dimension=dimension,
                tokenizer_tag=str(header.get("tokenizer", "")),
                provider_tag=str(header.get("provider", "")),
            )
            offset = len(raw_header)
            entries = []
            while True:
                raw = handle.readline()
                if not raw:
                    break
                if raw.strip():
                    try:
                        record = json.loads(raw.decode("utf-8"))
                        chunk = DocumentChunk(
                            chunk_id=record["chunk_id"],
                            text=record["text"],
                            token_count=record["token_count"],
                            metadata=ChunkMetadata.from_dict(record["metadata"]),
                        )
                        vector = tuple(float(v) for v in record["vector"])
                        if len(vector) != dimension:
                            raise ValueError(
                                f"vector has {len(vector)} entries, header says {dimension}"
                            )
                        entries.append(IndexEntry(chunk=chunk, vector=vector))
                    except (ValueError, KeyError, TypeError) as exc:
                        raise IndexLoadError(offset, f"bad entry line: {exc}") from exc
                offset += len(raw)
        index.upsert_many(entries)
        if len(index) != count:
            logger.warning(
                "index header count %d disagrees with %d loaded entries", count, len(index)
            )
        return index
