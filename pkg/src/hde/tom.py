"""Heuristic opponent modelling from static weakness maps.

Deliberately independent of the identity layer: nothing here reads or
writes an agent's belief graph.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import yaml

# the C loader is an order of magnitude faster when libyaml is present
_YAML_LOADER = getattr(yaml, "CSafeLoader", yaml.SafeLoader)


class WeaknessMapError(ValueError):
    pass


@dataclass(frozen=True)
class WeaknessEntry:
    target_school: str
    weakness_text: str
    trigger_patterns: tuple[str, ...]
    counter_hint: str

    def score(self, text: str) -> int:
        lowered = " ".join(text.lower().split())
        return sum(1 for p in self.trigger_patterns if p in lowered)


@dataclass(frozen=True)
class WeaknessMap:
    owner_agent_id: str
    entries: tuple[WeaknessEntry, ...] = ()
    owner_school: str | None = None

    def __post_init__(self) -> None:
        for e in self.entries:
            if not e.trigger_patterns:
                raise WeaknessMapError(f"{self.owner_agent_id}: entry for {e.target_school} has no triggers")
            if self.owner_school and e.target_school == self.owner_school:
                raise WeaknessMapError(
                    f"{self.owner_agent_id}: entry targets the owner's own school {e.target_school}"
                )


def select_hints(
    wmap: WeaknessMap, opponent_turn: str, opponent_school: str, max_hints: int = 2
) -> list[WeaknessEntry]:
    """Entries aimed at the opponent's school, ranked by trigger hits.

    Entries with no trigger present are never selected; ties keep map order.
    """
    if not opponent_turn.strip():
        raise ValueError("opponent_turn must be non-empty")
    scored = [
        (e.score(opponent_turn), i, e)
        for i, e in enumerate(wmap.entries)
        if e.target_school == opponent_school
    ]
    scored = [s for s in scored if s[0] >= 1]
    scored.sort(key=lambda s: (-s[0], s[1]))
    return [e for _, _, e in scored[:max_hints]]


def weakness_map_from_dict(doc: dict, owner_school: str | None = None, source: str = "<map>") -> WeaknessMap:
    try:
        entries = tuple(
            WeaknessEntry(
                target_school=str(raw["target_school"]).upper(),
                weakness_text=str(raw["weakness_text"]),
                trigger_patterns=tuple(" ".join(str(p).lower().split()) for p in raw["trigger_patterns"]),
                counter_hint=str(raw["counter_hint"]),
            )
            for raw in doc.get("entries") or []
        )
        return WeaknessMap(str(doc["owner_agent_id"]), entries, owner_school)
    except KeyError as exc:
        raise WeaknessMapError(f"{source}: missing field {exc.args[0]!r}") from None


def load_weakness_map(path: str | Path, owner_school: str | None = None) -> WeaknessMap:
    doc = yaml.load(Path(path).read_text(encoding="utf-8"), Loader=_YAML_LOADER)
    return weakness_map_from_dict(doc, owner_school, str(path))
