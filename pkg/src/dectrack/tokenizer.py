"""Deterministic word-level tokenizer with registered special tokens.

Backends are pluggable; this tokenizer backs the self-contained ones that
train from scratch. Words are lowercased alphanumeric runs; anything else
(punctuation, CJK characters) tokenizes one character at a time. Special
tokens are registered ids, never produced by encoding plain text, so they
stay atomic by construction.
"""

from __future__ import annotations

import json
import re
from collections import Counter
from pathlib import Path
from typing import Iterable

from .errors import SetupError

PAD = "[PAD]"
UNK = "[UNK]"
CLS = "[CLS]"
SEP = "[SEP]"
X1 = "[X1]"
X2 = "[X2]"
BOS = "<s>"
EOS = "</s>"

ENCODER_SPECIALS = (PAD, UNK, CLS, SEP)
SEQ2SEQ_SPECIALS = (PAD, UNK, BOS, EOS, X1, X2)

_TOKEN_RE = re.compile(r"[a-z0-9]+(?:'[a-z0-9]+)?|[^\sa-z0-9]")


def word_split(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


class WordTokenizer:
    """Fixed-vocabulary tokenizer; out-of-vocabulary words map to [UNK]."""

    def __init__(self, words: list[str], specials: tuple[str, ...]):
        self.specials = tuple(specials)
        self._id_to_token = list(self.specials) + list(words)
        if len(set(self._id_to_token)) != len(self._id_to_token):
            raise SetupError("tokenizer vocabulary contains duplicates")
        self._token_to_id = {tok: i for i, tok in enumerate(self._id_to_token)}

    @classmethod
    def train(
        cls,
        texts: Iterable[str],
        specials: tuple[str, ...] = ENCODER_SPECIALS,
        min_freq: int = 1,
        max_words: int | None = None,
    ) -> "WordTokenizer":
        """Build a vocabulary from a text corpus; ordering is deterministic
        (frequency-descending, then lexicographic)."""
        counts = Counter()
        for text in texts:
            counts.update(word_split(text))
        ranked = sorted(counts.items(), key=lambda item: (-item[1], item[0]))
        words = [w for w, c in ranked if c >= min_freq and w not in specials]
        if max_words is not None:
            words = words[:max_words]
        return cls(words, specials)

    def __len__(self) -> int:
        return len(self._id_to_token)

    @property
    def vocab_size(self) -> int:
        return len(self._id_to_token)

    def token_id(self, token: str) -> int:
        if token not in self._token_to_id:
            raise SetupError(f"token {token!r} is not registered in this tokenizer")
        return self._token_to_id[token]

    @property
    def pad_id(self) -> int:
        return self.token_id(PAD)

    @property
    def unk_id(self) -> int:
        return self.token_id(UNK)

    def has_special(self, token: str) -> bool:
        return token in self.specials

    def encode(self, text: str) -> list[int]:
        """Content token ids only; callers insert special ids themselves."""
        unk = self.unk_id
        ids = []
        for word in word_split(text):
            ids.append(self._token_to_id.get(word, unk))
        return ids

    def decode(self, ids: Iterable[int], skip_specials: bool = True) -> str:
        tokens = []
        special_set = set(self.specials)
        for i in ids:
            token = self._id_to_token[i]
            if skip_specials and token in special_set:
                continue
            tokens.append(token)
        return " ".join(tokens)

    def token(self, token_id: int) -> str:
        return self._id_to_token[token_id]

    # identity string for model-artifact sidecars
    def fingerprint(self) -> str:
        import hashlib

        digest = hashlib.sha256("\n".join(self._id_to_token).encode("utf-8")).hexdigest()
        return f"word-v1:{len(self)}:{digest[:12]}"

    def save(self, path: str | Path) -> None:
        payload = {"specials": list(self.specials), "words": self._id_to_token[len(self.specials):]}
        Path(path).write_text(json.dumps(payload, ensure_ascii=False, indent=0), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "WordTokenizer":
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(payload["words"], tuple(payload["specials"]))

    def to_dict(self) -> dict:
        return {"specials": list(self.specials), "words": self._id_to_token[len(self.specials):]}

    @classmethod
    def from_dict(cls, payload: dict) -> "WordTokenizer":
        return cls(payload["words"], tuple(payload["specials"]))
