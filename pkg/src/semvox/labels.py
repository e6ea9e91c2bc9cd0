"""Semantic label registry.

Labels are small integer codes stored in uint8 voxel arrays. Code 0 is
reserved for ``empty`` (free space); codes 1..23 name object categories.
The default registry carries the 16 evaluated object classes plus reserved
placeholders for the remaining codes, and can be re-mapped for custom
scenes as long as code 0 stays ``empty`` and at most 24 codes exist.
"""

from __future__ import annotations

EMPTY = 0
MAX_LABELS = 24

# The 16 object classes reported individually by the evaluation harness,
# in their fixed code order (1..16).
EVAL_CLASS_NAMES = (
    "buildings",
    "fences",
    "other",
    "poles",
    "roadlines",
    "roads",
    "sidewalks",
    "vegetation",
    "vehicles",
    "walls",
    "trafficsigns",
    "ground",
    "bridge",
    "guardrail",
    "trafficlight",
    "terrain",
)

DEFAULT_EVAL_CLASSES = tuple(range(1, len(EVAL_CLASS_NAMES) + 1))


class LabelRegistry:
    """Bidirectional mapping between label names and codes 0..23."""

    def __init__(self, names: dict[int, str] | None = None):
        if names is None:
            names = {0: "empty"}
            for i, n in enumerate(EVAL_CLASS_NAMES, start=1):
                names[i] = n
            for c in range(len(EVAL_CLASS_NAMES) + 1, MAX_LABELS):
                names[c] = f"reserved_{c}"
        if 0 not in names or names[0] != "empty":
            raise ValueError("label code 0 must be named 'empty'")
        for code in names:
            if not 0 <= code < MAX_LABELS:
                raise ValueError(f"label code {code} outside [0, {MAX_LABELS - 1}]")
        if len(set(names.values())) != len(names):
            raise ValueError("duplicate label names in registry")
        self._by_code = dict(sorted(names.items()))
        self._by_name = {n: c for c, n in self._by_code.items()}

    def name(self, code: int) -> str:
        try:
            return self._by_code[int(code)]
        except KeyError:
            raise KeyError(f"unknown label code {code}") from None

    def code(self, name: str) -> int:
        try:
            return self._by_name[name]
        except KeyError:
            raise KeyError(f"unknown label name {name!r}") from None

    def resolve(self, label: int | str) -> int:
        """Accept a code or a name; return the validated code."""
        if isinstance(label, str):
            return self.code(label)
        code = int(label)
        if code not in self._by_code:
            raise KeyError(f"unknown label code {code}")
        return code

    @property
    def codes(self) -> tuple[int, ...]:
        return tuple(self._by_code)

    def __len__(self) -> int:
        return len(self._by_code)


DEFAULT_REGISTRY = LabelRegistry()
