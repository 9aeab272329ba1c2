"""Label normalisation, edit distance and word-bag similarity."""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Optional, Union

_WORD = re.compile(r"[a-z0-9]+")


def levenshtein(a: str, b: str) -> int:
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def label_sim_syntactic(l1: Optional[str], l2: Optional[str]) -> float:
    """1 - edit distance / longer length, case-insensitive."""
    a, b = (l1 or "").lower(), (l2 or "").lower()
    if not a and not b:
        return 1.0
    if not a or not b:
        return 0.0
    return 1.0 - levenshtein(a, b) / max(len(a), len(b))


def stem(word: str) -> str:
    if word.endswith("ing") and len(word) > 5:
        return word[:-3]
    if word.endswith("ed") and len(word) > 4:
        return word[:-2]
    if word.endswith("s") and not word.endswith("ss") and len(word) > 3:
        return word[:-1]
    return word


def _read_lines(path: Union[str, Path, None], default: str) -> list[str]:
    if path is None:
        text = (resources.files("bpmnbench") / "data" / default).read_text("utf-8")
    else:
        text = Path(path).read_text("utf-8")
    return [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]


def load_stopwords(path: Union[str, Path, None] = None) -> frozenset[str]:
    return frozenset(ln.lower() for ln in _read_lines(path, "stopwords.txt"))


@dataclass(frozen=True)
class Tokenizer:
    stopwords: frozenset[str] = field(default_factory=load_stopwords)
    stemming: bool = True

    def words(self, text: Optional[str]) -> list[str]:
        out = []
        for w in _WORD.findall((text or "").lower()):
            if w in self.stopwords:
                continue
            out.append(stem(w) if self.stemming else w)
        return out

    def bag(self, text: Optional[str]) -> frozenset[str]:
        return frozenset(self.words(text))


class SynonymLexicon:
    """Symmetric word -> synonyms map."""

    def __init__(self, pairs: Iterable[tuple[str, str]] = ()):
        table: dict[str, set[str]] = {}
        for a, b in pairs:
            if a == b:
                continue
            table.setdefault(a, set()).add(b)
            table.setdefault(b, set()).add(a)
        self._table = {k: frozenset(v) for k, v in table.items()}

    def synonyms(self, word: str) -> frozenset[str]:
        return self._table.get(word, frozenset())

    def __len__(self) -> int:
        return len(self._table)

    @classmethod
    def parse(cls, lines: Iterable[str], tokenizer: Optional[Tokenizer] = None) -> "SynonymLexicon":
        tok = tokenizer or Tokenizer()
        pairs = []
        for ln in lines:
            if ":" not in ln:
                raise ValueError(f"lexicon line without ':': {ln!r}")
            head, rest = ln.split(":", 1)
            heads = tok.words(head)
            if len(heads) != 1:
                continue
            for syn in rest.split(","):
                words = tok.words(syn)
                if len(words) == 1:
                    pairs.append((heads[0], words[0]))
        return cls(pairs)

    @classmethod
    def load(cls, path: Union[str, Path, None] = None, tokenizer: Optional[Tokenizer] = None) -> "SynonymLexicon":
        return cls.parse(_read_lines(path, "synonyms.txt"), tokenizer)


def _synonym_hits(wa: frozenset[str], wb: frozenset[str], lexicon: SynonymLexicon) -> int:
    return sum(1 for w in wa - wb if lexicon.synonyms(w) & wb)


def label_sim_semantic(b1: frozenset[str], b2: frozenset[str], lexicon: SynonymLexicon,
                       w_i: float = 1.0, w_s: float = 0.75) -> float:
    if not b1 and not b2:
        return 1.0
    if not b1 or not b2:
        return 0.0
    shared = len(b1 & b2)
    syn = _synonym_hits(b1, b2, lexicon) + _synonym_hits(b2, b1, lexicon)
    score = (2 * w_i * shared + w_s * syn) / (len(b1) + len(b2))
    return min(1.0, max(0.0, score))
