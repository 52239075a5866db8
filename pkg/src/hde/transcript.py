"""Turns, phases and the transcript JSONL format."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

MODERATOR = "MODERATOR"


class Phase(str, enum.Enum):
    DELIBERATION = "DELIBERATION"
    INTERROGATION = "INTERROGATION"
    DEBATE = "DEBATE"
    DONE = "DONE"

    @property
    def order(self) -> int:
        return list(Phase).index(self)


@dataclass
class Turn:
    turn_index: int
    phase: Phase
    speaker: str
    text: str
    team_id: str | None = None
    debate_turn_index: int | None = None
    ts_ms: int = 0
    annotations: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.text.strip():
            raise ValueError(f"turn {self.turn_index}: empty text")
        if self.speaker == MODERATOR and self.team_id is not None:
            raise ValueError("moderator turns carry no team")

    @property
    def is_moderator(self) -> bool:
        return self.speaker == MODERATOR

    def to_json(self) -> dict:
        return {
            "turn_index": self.turn_index,
            "phase": self.phase.value,
            "debate_turn_index": self.debate_turn_index,
            "speaker": self.speaker,
            "team_id": self.team_id,
            "text": self.text,
            "ts_ms": self.ts_ms,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "Turn":
        return cls(
            turn_index=int(doc["turn_index"]),
            phase=Phase(doc["phase"]),
            speaker=doc["speaker"],
            text=doc["text"],
            team_id=doc.get("team_id"),
            debate_turn_index=doc.get("debate_turn_index"),
            ts_ms=int(doc.get("ts_ms", 0)),
        )


def speaker_turns(transcript: Iterable[Turn], phase: Phase = Phase.DEBATE) -> list[Turn]:
    return [t for t in transcript if t.phase == phase and not t.is_moderator]


def dumps_jsonl(turns: Iterable[Turn]) -> str:
    return "".join(json.dumps(t.to_json(), ensure_ascii=False, sort_keys=True) + "\n" for t in turns)


def write_transcript(path: str | Path, turns: Iterable[Turn]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_jsonl(turns), encoding="utf-8")
    return path


def read_transcript(path: str | Path) -> list[Turn]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    return [Turn.from_json(json.loads(line)) for line in lines if line.strip()]
