from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Any


@dataclass
class EvalReport:
    """Named metric values, optional per-class P/R/F1 and a sample count."""

    metrics: dict[str, float]
    per_class: dict[str, dict[str, float]] | None = None
    n: int = 0
    extras: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("n must be >= 0")
        for name, value in self.metrics.items():
            if "f1" in name and not 0.0 <= value <= 1.0:
                raise ValueError(f"{name}={value} outside [0, 1]")

    def __getitem__(self, name: str) -> float:
        return self.metrics[name]

    def to_dict(self) -> dict:
        return asdict(self)

    def table(self) -> str:
        lines = [f"n = {self.n}"]
        width = max((len(k) for k in self.metrics), default=0)
        for k, v in self.metrics.items():
            lines.append(f"{k:<{width}}  {v:.4f}")
        if self.per_class:
            lines.append(f"{'class':<8}{'P':>8}{'R':>8}{'F1':>8}")
            for cls, m in self.per_class.items():
                lines.append(f"{cls:<8}{m['precision']:>8.4f}{m['recall']:>8.4f}{m['f1']:>8.4f}")
        return "\n".join(lines)
