"""Feature containers shared by the filter baselines and expression mining."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Iterable


class Method(str, Enum):
    CHI2 = "CHI2"
    IG = "IG"
    MI = "MI"
    OR = "OR"
    ECE = "ECE"
    ANOVA = "ANOVA"
    GSS = "GSS"
    DE = "DE"

    @classmethod
    def parse(cls, name: str) -> "Method":
        key = name.strip().upper().replace("F-ANOVA", "ANOVA").replace("CHI²", "CHI2")
        try:
            return cls(key)
        except ValueError:
            raise ValueError(f"unknown feature selection method {name!r}") from None


@dataclass(frozen=True)
class Feature:
    """A selected term or expression; single terms are 1-token expressions."""

    tokens: tuple[str, ...]
    score: float
    precision: float | None = None
    recall: float | None = None
    source_doc: int | None = None

    @property
    def name(self) -> str:
        return " ".join(self.tokens)


@dataclass(frozen=True)
class FeatureSet:
    method: Method
    features: tuple[Feature, ...]
    k: int
    truncated: bool = False  # fewer than k candidates were available
    warnings: tuple[str, ...] = field(default=())

    def __len__(self) -> int:
        return len(self.features)

    def __iter__(self):
        return iter(self.features)

    @property
    def expressions(self) -> list[tuple[str, ...]]:
        return [f.tokens for f in self.features]

    @property
    def names(self) -> list[str]:
        return [f.name for f in self.features]

    def head(self, k: int) -> "FeatureSet":
        return FeatureSet(self.method, self.features[:k], k, len(self.features) < k, self.warnings)

    def to_dict(self) -> dict:
        return {
            "method": self.method.value,
            "k": self.k,
            "truncated": self.truncated,
            "features": [
                {key: (list(v) if key == "tokens" else _json_num(v)) for key, v in asdict(f).items()}
                for f in self.features
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "FeatureSet":
        feats = tuple(
            Feature(
                tuple(f["tokens"]),
                float(f["score"]),
                f.get("precision"),
                f.get("recall"),
                f.get("source_doc"),
            )
            for f in data["features"]
        )
        return cls(Method.parse(data["method"]), feats, int(data["k"]), bool(data.get("truncated", False)))

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def _json_num(v):
    if isinstance(v, float) and math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return v


def rank_features(features: Iterable[Feature]) -> list[Feature]:
    """Descending score; ties broken lexicographically on the token sequence."""
    return sorted(features, key=lambda f: (-f.score, f.tokens))
