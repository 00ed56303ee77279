"""Item storage, item-card rendering, attribute matching, and retrieval.

The retrieval component is a pluggable embedder ranked by inner product. The
default embedder is a deterministic hashed bag-of-words vector so the whole
pipeline runs offline; an HTTP embedder can be plugged in for real encoders.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Protocol, Sequence

import requests

from .errors import CatalogIoError, EmbedderError, EmptyCatalogError
from .textmetrics import tokenize

logger = logging.getLogger(__name__)


@dataclass
class Item:
    """One catalog entry; the factual source grounding generation and judging."""

    id: str
    title: str
    year: int | None = None
    genres: set[str] = field(default_factory=set)
    plot: str = ""
    director: str | None = None
    actors: list[str] = field(default_factory=list)
    rating_value: float | None = None
    rating_count: int | None = None
    reviews: list[str] = field(default_factory=list)
    awards: str | None = None

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("item id must be non-empty")
        if not self.title:
            raise ValueError("item title must be non-empty")
        if self.rating_value is not None and not 0 <= self.rating_value <= 10:
            raise ValueError(f"rating_value {self.rating_value} outside [0, 10]")


@dataclass(frozen=True)
class ItemCard:
    """Rendered factual description used to fill <ITEM_INFORMATION> slots."""

    item_id: str
    text: str


@dataclass(frozen=True)
class AttributeGroup:
    """Preferred attribute tags initializing a simulated seeker."""

    id: str
    attributes: frozenset[str]

    def __post_init__(self) -> None:
        if not self.attributes:
            raise ValueError("attribute group must be non-empty")

    @classmethod
    def of(cls, group_id: str, attributes: Iterable[str]) -> "AttributeGroup":
        return cls(id=group_id, attributes=frozenset(attributes))

    def render(self) -> str:
        return ", ".join(sorted(self.attributes, key=str.casefold))


def render_item_card(item: Item) -> ItemCard:
    """Deterministic labeled text block; absent fields omitted, values untouched."""
    lines = [f"Title: {item.title}"]
    if item.year is not None:
        lines.append(f"Year: {item.year}")
    if item.genres:
        lines.append("Genre: " + ", ".join(sorted(item.genres, key=str.casefold)))
    if item.director:
        lines.append(f"Director: {item.director}")
    if item.actors:
        lines.append("Cast: " + ", ".join(item.actors))
    if item.plot:
        lines.append(f"Plot: {item.plot}")
    if item.rating_value is not None:
        rating = f"Rating: {item.rating_value:g}"
        if item.rating_count is not None:
            rating += f" ({item.rating_count} ratings)"
        lines.append(rating)
    elif item.rating_count is not None:
        lines.append(f"Rating: {item.rating_count} ratings")
    if item.reviews:
        lines.append("Reviews: " + " | ".join(item.reviews))
    if item.awards:
        lines.append(f"Awards: {item.awards}")
    return ItemCard(item_id=item.id, text="\n".join(lines))


def attribute_match(item: Item, group: AttributeGroup) -> bool:
    """True iff every group attribute appears among the item genres (case-insensitive)."""
    genres = {g.strip().lower() for g in item.genres}
    wanted = {a.strip().lower() for a in group.attributes}
    return wanted <= genres


class Embedder(Protocol):
    def embed(self, texts: Sequence[str]) -> list[list[float]]: ...


class HashedBagOfWordsEmbedder:
    """Deterministic signed feature-hashing embedder.

    Same text always maps to the same L2-normalized vector, which keeps
    retrieval reproducible without any model weights.
    """

    def __init__(self, dim: int = 256):
        self.dim = dim

    def embed(self, texts: Sequence[str]) -> list[list[float]]:
        return [self._embed_one(t) for t in texts]

    def _embed_one(self, text: str) -> list[float]:
        vec = [0.0] * self.dim
        for token in tokenize(text):
            digest = hashlib.sha1(token.encode("utf-8")).digest()
            index = int.from_bytes(digest[:4], "big") % self.dim
            sign = 1.0 if digest[4] & 1 else -1.0
            vec[index] += sign
        norm = math.sqrt(sum(v * v for v in vec))
        if norm:
            vec = [v / norm for v in vec]
        return vec


class HttpEmbedder:
    """External embedding service: POST {texts: [...]} -> {vectors: [[...]]}."""

    def __init__(self, endpoint: str, timeout: float = 30.0):
        self.endpoint = endpoint
        self.timeout = timeout

    def embed(self, texts: Sequence[str]) -> list[list[float]]:
        try:
            resp = requests.post(self.endpoint, json={"texts": list(texts)}, timeout=self.timeout)
            resp.raise_for_status()
            vectors = resp.json()["vectors"]
        except (requests.RequestException, KeyError, ValueError) as exc:
            raise EmbedderError(f"embedding service failed: {exc}") from exc
        if len(vectors) != len(texts):
            raise EmbedderError("embedding service returned wrong number of vectors")
        return [[float(x) for x in v] for v in vectors]


def _dot(a: Sequence[float], b: Sequence[float]) -> float:
    return sum(x * y for x, y in zip(a, b))


class Catalog:
    """Immutable item collection with cached item-card embeddings."""

    def __init__(self, items: Iterable[Item], embedder: Embedder | None = None, skipped: int = 0):
        self._items: dict[str, Item] = {}
        duplicates = 0
        for item in items:
            if item.id in self._items:
                duplicates += 1
                continue
            self._items[item.id] = item
        self.skipped = skipped + duplicates
        self.embedder: Embedder = embedder or HashedBagOfWordsEmbedder()
        self._vectors: dict[str, list[float]] = {}
        self._vector_lock = threading.Lock()

    def __len__(self) -> int:
        return len(self._items)

    def __contains__(self, item_id: str) -> bool:
        return item_id in self._items

    def get(self, item_id: str) -> Item:
        return self._items[item_id]

    def items(self) -> list[Item]:
        return list(self._items.values())

    def card(self, item_id: str) -> ItemCard:
        return render_item_card(self._items[item_id])

    def _vector(self, item: Item) -> list[float]:
        cached = self._vectors.get(item.id)
        if cached is not None:
            return cached
        with self._vector_lock:
            cached = self._vectors.get(item.id)
            if cached is None:
                cached = self.embedder.embed([render_item_card(item).text])[0]
                self._vectors[item.id] = cached
        return cached

    def retrieve(self, query_text: str, k: int) -> list[str]:
        """Top-k item ids by inner product, ties broken by ascending id."""
        if k < 1:
            raise ValueError("k must be >= 1")
        if not self._items:
            raise EmptyCatalogError("cannot retrieve from an empty catalog")
        query_vec = self.embedder.embed([query_text])[0]
        scored = sorted(
            ((-_dot(query_vec, self._vector(item)), item.id) for item in self._items.values())
        )
        return [item_id for _, item_id in scored[: min(k, len(self._items))]]


def _parse_record(record: dict) -> Item | None:
    item_id = record.get("id")
    title = record.get("title")
    if not item_id or not title:
        return None
    genres = {str(g).strip().lower() for g in record.get("genres") or [] if str(g).strip()}
    year = record.get("year")
    rating_value = record.get("rating_value")
    rating_count = record.get("rating_count")
    try:
        return Item(
            id=str(item_id),
            title=str(title),
            year=int(year) if year is not None else None,
            genres=genres,
            plot=str(record.get("plot") or ""),
            director=record.get("director") or None,
            actors=[str(a) for a in record.get("actors") or []],
            rating_value=float(rating_value) if rating_value is not None else None,
            rating_count=int(rating_count) if rating_count is not None else None,
            reviews=[str(r) for r in record.get("reviews") or []],
            awards=record.get("awards") or None,
        )
    except (TypeError, ValueError):
        return None


def load_catalog(source: str | Path, embedder: Embedder | None = None) -> Catalog:
    """Load a JSONL catalog; invalid records are skipped and counted."""
    path = Path(source)
    try:
        raw_lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise CatalogIoError(f"cannot read catalog {path}: {exc}") from exc
    items: list[Item] = []
    skipped = 0
    for line in raw_lines:
        line = line.strip()
        if not line:
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError:
            skipped += 1
            continue
        item = _parse_record(record) if isinstance(record, dict) else None
        if item is None:
            skipped += 1
            continue
        items.append(item)
    if not items:
        raise EmptyCatalogError(f"catalog {path} holds zero valid records")
    if skipped:
        logger.info("catalog %s: loaded %d items, skipped %d records", path, len(items), skipped)
    return Catalog(items, embedder=embedder, skipped=skipped)
