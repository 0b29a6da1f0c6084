"""Document-term matrices: text preprocessing, sparsity filtering and persistence.

On disk a corpus is a directory holding

* ``dtm.mtx``     MatrixMarket coordinate integer matrix, 1-based, documents as rows
* ``vocab.txt``   one term per line, line k is column k
* ``labels.txt``  optional, one label per line, line i is document i
* ``doc_ids.txt`` optional, one identifier per line
"""

import functools
import math
import os
import re
import tempfile
import unicodedata
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import NamedTuple, Optional, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import CorpusFormatError, DomainError

__all__ = [
    "DocumentTermMatrix",
    "PreprocessConfig",
    "CorpusStats",
    "default_stopwords",
    "tokenize",
    "preprocess",
    "filter_sparse_terms",
    "corpus_stats",
    "drop_empty_documents",
    "order_columns_by_frequency",
    "save_dtm",
    "load_dtm",
]

MM_HEADER = "%%MatrixMarket matrix coordinate integer general"
DTM_FILE = "dtm.mtx"
VOCAB_FILE = "vocab.txt"
LABELS_FILE = "labels.txt"
DOC_IDS_FILE = "doc_ids.txt"


class DocumentTermMatrix:
    """Sparse ``n x p`` matrix of term counts with its vocabulary.

    Parameters
    ----------
    counts : array-like or scipy sparse matrix
        Nonnegative integer counts, documents as rows.
    vocab : sequence of str
        Distinct terms, one per column.
    labels : sequence of str, optional
        Gold category of each document.
    doc_ids : sequence of str, optional
        Document identifiers; defaults to ``"0" .. "n-1"``.
    """

    def __init__(self, counts, vocab, labels=None, doc_ids=None):
        m = sp.csr_matrix(counts, dtype=np.int64, copy=True)
        m.sum_duplicates()
        m.sort_indices()
        m.eliminate_zeros()
        if m.nnz and m.data.min() < 0:
            k = int(np.argmax(m.data < 0))
            row = int(np.searchsorted(m.indptr, k, side="right") - 1)
            raise DomainError(f"negative count at document {row}, term {int(m.indices[k])}")
        vocab = tuple(str(v) for v in vocab)
        if len(vocab) != m.shape[1]:
            raise DomainError(f"vocabulary has {len(vocab)} terms but the matrix has {m.shape[1]} columns")
        seen = set()
        for term in vocab:
            if term in seen:
                raise DomainError(f"duplicate vocabulary term {term!r}")
            seen.add(term)
        n = m.shape[0]
        if labels is not None:
            labels = tuple(str(v) for v in labels)
            if len(labels) != n:
                raise DomainError(f"{len(labels)} labels for {n} documents")
        if doc_ids is None:
            doc_ids = tuple(str(i) for i in range(n))
        else:
            doc_ids = tuple(str(v) for v in doc_ids)
            if len(doc_ids) != n:
                raise DomainError(f"{len(doc_ids)} document ids for {n} documents")
        self.counts = m
        self.vocab = vocab
        self.labels = labels
        self.doc_ids = doc_ids

    @property
    def n(self) -> int:
        return self.counts.shape[0]

    @property
    def p(self) -> int:
        return self.counts.shape[1]

    def doc_freq(self) -> np.ndarray:
        """Number of documents containing each term at least once."""
        return np.diff(self.counts.tocsc().indptr)

    def doc_lengths(self) -> np.ndarray:
        return np.asarray(self.counts.sum(axis=1)).ravel()

    def select_rows(self, rows) -> "DocumentTermMatrix":
        rows = np.asarray(rows, dtype=np.intp)
        return DocumentTermMatrix(
            self.counts[rows],
            self.vocab,
            None if self.labels is None else [self.labels[i] for i in rows],
            [self.doc_ids[i] for i in rows],
        )

    def select_columns(self, cols) -> "DocumentTermMatrix":
        cols = np.asarray(cols, dtype=np.intp)
        return DocumentTermMatrix(
            self.counts[:, cols], [self.vocab[j] for j in cols], self.labels, self.doc_ids
        )

    def __eq__(self, other):
        if not isinstance(other, DocumentTermMatrix):
            return NotImplemented
        return (
            self.counts.shape == other.counts.shape
            and (self.counts != other.counts).nnz == 0
            and self.vocab == other.vocab
            and self.labels == other.labels
            and self.doc_ids == other.doc_ids
        )

    __hash__ = None

    def __repr__(self):
        return f"DocumentTermMatrix(n={self.n}, p={self.p}, nnz={self.counts.nnz})"


def default_stopwords() -> frozenset:
    """Bundled English stopword list, with apostrophe-free variants added."""
    text = resources.files("blmix").joinpath("data/stopwords_en.txt").read_text(encoding="utf-8")
    words = {w.strip() for w in text.splitlines() if w.strip()}
    return frozenset(words | {w.replace("'", "") for w in words})


@dataclass(frozen=True)
class PreprocessConfig:
    min_token_len: int = 4
    max_token_len: int = 16
    lowercase: bool = True
    strip_punct_digits: bool = True
    stopword_list: frozenset = field(default_factory=default_stopwords)
    stemmer: str = "english-snowball"
    min_doc_freq: float = 0.01

    def __post_init__(self):
        if not 0 < self.min_token_len <= self.max_token_len:
            raise ValueError("need 0 < min_token_len <= max_token_len")
        if self.stemmer not in ("english-snowball", "none"):
            raise ValueError(f"unknown stemmer {self.stemmer!r}")
        if not 0 <= self.min_doc_freq < 1:
            raise ValueError("min_doc_freq must lie in [0, 1)")


_WS = re.compile(r"\s+")


def _strip_punct_digits(text: str) -> str:
    # P* punctuation, S* symbols, N* digits and other numerals
    return "".join(ch for ch in text if unicodedata.category(ch)[0] not in "PSN")


@functools.lru_cache(maxsize=None)
def _make_stemmer(name):
    if name == "none":
        return None
    import snowballstemmer

    return snowballstemmer.stemmer("english")


def tokenize(text: str, config: PreprocessConfig, stemmer=None) -> list:
    """Turn one raw document into its list of surviving tokens.

    ``stemmer`` defaults to the one named by ``config.stemmer``.
    """
    if stemmer is None:
        stemmer = _make_stemmer(config.stemmer)
    text = unicodedata.normalize("NFC", text)
    text = _WS.sub(" ", text).strip()
    if config.strip_punct_digits:
        text = _strip_punct_digits(text)
    if config.lowercase:
        text = text.lower()
    words = [w for w in text.split() if w not in config.stopword_list]
    if stemmer is not None:
        words = stemmer.stemWords(words)
    return [w for w in words if config.min_token_len <= len(w) <= config.max_token_len]


def preprocess(
    raw_docs: Sequence[str],
    config: Optional[PreprocessConfig] = None,
    labels=None,
    doc_ids=None,
) -> DocumentTermMatrix:
    """Build a document-term matrix from raw texts.

    Vocabulary columns are sorted lexicographically. Terms are then dropped
    by :func:`filter_sparse_terms` with ``config.min_doc_freq``.
    """
    config = config or PreprocessConfig()
    if len(raw_docs) == 0:
        raise DomainError("no documents to preprocess")
    stemmer = _make_stemmer(config.stemmer)
    tokenized = [tokenize(doc, config, stemmer) for doc in raw_docs]
    vocab = sorted({t for doc in tokenized for t in doc})
    if not vocab:
        raise DomainError("empty vocabulary after preprocessing")
    index = {t: j for j, t in enumerate(vocab)}
    rows, cols = [], []
    for i, doc in enumerate(tokenized):
        rows.extend([i] * len(doc))
        cols.extend(index[t] for t in doc)
    data = np.ones(len(rows), dtype=np.int64)
    counts = sp.csr_matrix((data, (rows, cols)), shape=(len(raw_docs), len(vocab)))
    dtm = DocumentTermMatrix(counts, vocab, labels, doc_ids)
    if config.min_doc_freq > 0:
        dtm = filter_sparse_terms(dtm, config.min_doc_freq)
    return dtm


def filter_sparse_terms(dtm: DocumentTermMatrix, min_doc_freq: float) -> DocumentTermMatrix:
    """Drop terms found in fewer than ``ceil(min_doc_freq * n)`` documents.

    Terms exactly at the threshold are kept; surviving columns keep their order.
    """
    if not 0 <= min_doc_freq < 1:
        raise DomainError("min_doc_freq must lie in [0, 1)")
    if min_doc_freq == 0:
        return dtm
    # the epsilon stops 0.07 * 100 = 7.000000000000001 from rounding up to 8
    threshold = math.ceil(min_doc_freq * dtm.n - 1e-9)
    keep = np.flatnonzero(dtm.doc_freq() >= threshold)
    if keep.size == 0:
        raise DomainError(f"every term has document frequency below {threshold}")
    if keep.size == dtm.p:
        return dtm
    return dtm.select_columns(keep)


class CorpusStats(NamedTuple):
    n: int
    p: int
    sparsity: float
    mean_terms_per_doc: float


def corpus_stats(dtm: DocumentTermMatrix) -> CorpusStats:
    if dtm.n == 0 or dtm.p == 0:
        raise DomainError("empty document-term matrix")
    cells = dtm.n * dtm.p
    return CorpusStats(
        n=dtm.n,
        p=dtm.p,
        sparsity=(cells - dtm.counts.nnz) / cells,
        mean_terms_per_doc=float(dtm.counts.sum()) / dtm.n,
    )


def drop_empty_documents(dtm: DocumentTermMatrix):
    """Remove all-zero rows. Returns ``(dtm, dropped_indices)``."""
    lengths = dtm.doc_lengths()
    dropped = np.flatnonzero(lengths == 0)
    if dropped.size == 0:
        return dtm, dropped
    return dtm.select_rows(np.flatnonzero(lengths > 0)), dropped


def order_columns_by_frequency(dtm: DocumentTermMatrix):
    """Reorder columns by descending corpus frequency (stable on ties).

    The least frequent term ends up in the last column. Returns
    ``(dtm, order)`` where ``order[k]`` is the original index of new column k.
    """
    freq = np.asarray(dtm.counts.sum(axis=0)).ravel()
    order = np.argsort(-freq, kind="stable")
    return dtm.select_columns(order), order


# ---------------------------------------------------------------- persistence


def _atomic_write(path: Path, text: str):
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _lines(items):
    return "".join(f"{x}\n" for x in items)


def format_matrix_market(counts: sp.csr_matrix) -> str:
    coo = counts.tocoo()
    order = np.lexsort((coo.col, coo.row))
    out = [MM_HEADER, f"{counts.shape[0]} {counts.shape[1]} {coo.nnz}"]
    out.extend(f"{r + 1} {c + 1} {v}" for r, c, v in zip(coo.row[order], coo.col[order], coo.data[order]))
    return "\n".join(out) + "\n"


def save_dtm(dtm: DocumentTermMatrix, path) -> None:
    """Write ``dtm`` into directory ``path`` (created if missing)."""
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    for term in dtm.vocab:
        if term == "" or "\n" in term or "\r" in term:
            raise DomainError(f"term {term!r} cannot be stored one per line")
    payload = {
        DTM_FILE: format_matrix_market(dtm.counts),
        VOCAB_FILE: _lines(dtm.vocab),
        DOC_IDS_FILE: _lines(dtm.doc_ids),
    }
    if dtm.labels is not None:
        payload[LABELS_FILE] = _lines(dtm.labels)
    for name, text in payload.items():
        _atomic_write(path / name, text)
    if dtm.labels is None and (path / LABELS_FILE).exists():
        (path / LABELS_FILE).unlink()


def _read_lines(path: Path):
    with open(path, encoding="utf-8", newline="") as fh:
        text = fh.read()
    if text and not text.endswith("\n"):
        text += "\n"
    return text.split("\n")[:-1]


def parse_matrix_market(path: Path) -> sp.csr_matrix:
    lines = _read_lines(path)
    if not lines or lines[0].strip() != MM_HEADER:
        raise CorpusFormatError(f"{path}:1:1: expected header {MM_HEADER!r}")
    body = [(k + 1, ln) for k, ln in enumerate(lines) if k > 0 and not ln.startswith("%")]
    if not body:
        raise CorpusFormatError(f"{path}: missing size line")

    def ints(lineno, line, expected):
        parts = line.split()
        if len(parts) != expected:
            raise CorpusFormatError(f"{path}:{lineno}: expected {expected} fields, found {len(parts)}")
        vals = []
        for col, tok in enumerate(parts, start=1):
            try:
                vals.append(int(tok))
            except ValueError:
                raise CorpusFormatError(f"{path}:{lineno}:{col}: not an integer: {tok!r}") from None
        return vals

    n, p, nnz = ints(*body[0], 3)
    if n < 0 or p < 0 or nnz < 0:
        raise CorpusFormatError(f"{path}:{body[0][0]}: negative size")
    entries = [ln for ln in body[1:] if ln[1].strip()]
    if len(entries) != nnz:
        raise CorpusFormatError(f"{path}: header declares {nnz} entries, found {len(entries)}")
    rows = np.empty(nnz, dtype=np.int64)
    cols = np.empty(nnz, dtype=np.int64)
    vals = np.empty(nnz, dtype=np.int64)
    seen = set()
    for k, (lineno, line) in enumerate(entries):
        i, j, v = ints(lineno, line, 3)
        if not 1 <= i <= n:
            raise CorpusFormatError(f"{path}:{lineno}:1: row index {i} outside 1..{n}")
        if not 1 <= j <= p:
            raise CorpusFormatError(f"{path}:{lineno}:2: column index {j} outside 1..{p}")
        if v < 0:
            raise CorpusFormatError(f"{path}:{lineno}:3: negative count {v} at (row {i}, column {j})")
        if (i, j) in seen:
            raise CorpusFormatError(f"{path}:{lineno}: duplicate entry at (row {i}, column {j})")
        seen.add((i, j))
        rows[k], cols[k], vals[k] = i - 1, j - 1, v
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, p))


def load_dtm(path) -> DocumentTermMatrix:
    """Read a corpus directory written by :func:`save_dtm`."""
    path = Path(path)
    counts = parse_matrix_market(path / DTM_FILE)
    vocab = _read_lines(path / VOCAB_FILE)
    if len(vocab) != counts.shape[1]:
        raise CorpusFormatError(f"{path / VOCAB_FILE}: {len(vocab)} terms for {counts.shape[1]} columns")
    first = {}
    for lineno, term in enumerate(vocab, start=1):
        if term in first:
            raise CorpusFormatError(
                f"{path / VOCAB_FILE}:{lineno}: duplicate term {term!r} (first seen on line {first[term]})"
            )
        first[term] = lineno
    labels = None
    if (path / LABELS_FILE).exists():
        labels = _read_lines(path / LABELS_FILE)
        if len(labels) != counts.shape[0]:
            raise CorpusFormatError(f"{path / LABELS_FILE}: {len(labels)} labels for {counts.shape[0]} documents")
    doc_ids = None
    if (path / DOC_IDS_FILE).exists():
        doc_ids = _read_lines(path / DOC_IDS_FILE)
        if len(doc_ids) != counts.shape[0]:
            raise CorpusFormatError(f"{path / DOC_IDS_FILE}: {len(doc_ids)} ids for {counts.shape[0]} documents")
    return DocumentTermMatrix(counts, vocab, labels, doc_ids)
