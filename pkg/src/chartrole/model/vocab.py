"""Whitespace-then-character tokenizer vocabulary built from a corpus."""

from __future__ import annotations

import json
from collections import Counter
from typing import Iterable

PAD = 0
UNK = 1
_SPECIALS = ("<pad>", "<unk>")


class Vocab:
    def __init__(self, itos: list[str]):
        self.itos = list(itos)
        self.stoi = {s: i for i, s in enumerate(self.itos)}
        if self.itos[:2] != list(_SPECIALS):
            raise ValueError("vocabulary must begin with the reserved tokens")

    def __len__(self) -> int:
        return len(self.itos)

    @classmethod
    def build(cls, texts: Iterable[str], max_words: int = 2000) -> "Vocab":
        chars: set[str] = set()
        words: Counter = Counter()
        for text in texts:
            chars.update(text)
            words.update(text.split())
        itos = list(_SPECIALS) + sorted(chars)
        seen = set(itos)
        ranked = sorted(words.items(), key=lambda kv: (-kv[1], kv[0]))
        for word, _ in ranked:
            if len(itos) - len(_SPECIALS) - len(chars) >= max_words:
                break
            if word not in seen:
                itos.append(word)
                seen.add(word)
        return cls(itos)

    def encode(self, text: str) -> list[int]:
        """Word ids where possible, per-character fallback otherwise."""
        out: list[int] = []
        parts = text.split()
        if not parts:
            parts = [text]
        for word in parts:
            wid = self.stoi.get(word)
            if wid is not None:
                out.append(wid)
            else:
                out.extend(self.stoi.get(ch, UNK) for ch in word)
        return out

    def to_json(self) -> str:
        return json.dumps({"itos": self.itos})

    @classmethod
    def from_json(cls, text: str) -> "Vocab":
        return cls(json.loads(text)["itos"])
