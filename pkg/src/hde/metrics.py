"""Keyword-tracking debate metrics and learning-outcome aggregation.

All metrics operate on Phase 3 speaker turns. Resilience metrics look at the
six speaker turns that follow the injected perturbation.
"""

from __future__ import annotations

import csv
import enum
import hashlib
import math
import re
import statistics
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from hde.transcript import Phase, Turn, speaker_turns

OBSERVATION_WINDOW = 6
RECOVERY_THRESHOLD = 3
COHERENCE_THRESHOLD = 3
DOCTRINE_THRESHOLD = 2
CROSS_REF_THRESHOLD = 1


class MetricError(ValueError):
    pass


def round2(value: float | None) -> float | None:
    """Half-up rounding to two decimals, the way the report tables print."""
    if value is None:
        return None
    return float(Decimal(repr(value)).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


# -- keyword sets ---------------------------------------------------------------


@dataclass(frozen=True)
class KeywordSet:
    name: str
    keywords: tuple[str, ...]

    def __post_init__(self) -> None:
        cleaned = tuple(dict.fromkeys(" ".join(k.lower().split()) for k in self.keywords if k.strip()))
        if not cleaned:
            raise MetricError(f"keyword set {self.name} is empty")
        object.__setattr__(self, "keywords", cleaned)

    def __contains__(self, keyword: str) -> bool:
        return keyword in self.keywords


@lru_cache(maxsize=4096)
def _pattern(keyword: str) -> re.Pattern:
    if " " in keyword:
        return re.compile(re.escape(keyword))
    return re.compile(r"(?<![a-z0-9])" + re.escape(keyword) + r"(?![a-z0-9])")


def matched_keywords(text: str, keywords: KeywordSet | Iterable[str]) -> set[str]:
    words = keywords.keywords if isinstance(keywords, KeywordSet) else keywords
    lowered = " ".join(text.lower().split())
    return {k for k in words if _pattern(k).search(lowered)}


def count_hits(text: str, keywords: KeywordSet | Iterable[str]) -> int:
    """Number of distinct keywords present; single words must stand alone."""
    return len(matched_keywords(text, keywords))


@dataclass(frozen=True)
class Lexicon:
    base: KeywordSet
    valid: KeywordSet
    frameworks: Mapping[str, KeywordSet]
    digest: str = ""

    def __post_init__(self) -> None:
        missing = set(self.base.keywords) - set(self.valid.keywords)
        if missing:
            raise MetricError(f"BASE keywords missing from VALID: {sorted(missing)}")

    def framework(self, school: str) -> KeywordSet:
        try:
            return self.frameworks[school]
        except KeyError:
            raise MetricError(f"no framework keyword set for school {school}") from None


def _read_keywords(text: str) -> list[str]:
    return [line.split("#", 1)[0].strip() for line in text.splitlines() if line.split("#", 1)[0].strip()]


def load_lexicon(directory: str | Path | None = None) -> Lexicon:
    """Read ``base.txt``, ``valid.txt`` and ``framework_<school>.txt`` files.

    VALID is widened to include BASE and every framework set.
    """
    root = Path(directory) if directory is not None else Path(str(resources.files("hde.data") / "keywords"))
    files = sorted(root.glob("*.txt"))
    if not files:
        raise MetricError(f"no keyword files in {root}")
    digest = hashlib.sha256()
    raw: dict[str, list[str]] = {}
    for f in files:
        content = f.read_text(encoding="utf-8")
        digest.update(f.name.encode() + b"\0" + content.encode("utf-8") + b"\0")
        raw[f.stem] = _read_keywords(content)
    if "base" not in raw:
        raise MetricError(f"{root}: base.txt missing")
    frameworks = {
        stem[len("framework_"):].upper(): KeywordSet(f"FRAMEWORK({stem[len('framework_'):].upper()})", tuple(words))
        for stem, words in raw.items()
        if stem.startswith("framework_")
    }
    base = KeywordSet("BASE", tuple(raw["base"]))
    valid_words = list(raw.get("valid", [])) + list(base.keywords)
    for fw in frameworks.values():
        valid_words += fw.keywords
    return Lexicon(base, KeywordSet("VALID", tuple(valid_words)), frameworks, digest.hexdigest())


# -- resilience -------------------------------------------------------------------


def observation_window(transcript: Sequence[Turn], injection_turn: int, size: int = OBSERVATION_WINDOW) -> list[Turn]:
    window = [
        t for t in speaker_turns(transcript)
        if t.debate_turn_index is not None and t.debate_turn_index > injection_turn
    ]
    window.sort(key=lambda t: t.debate_turn_index)
    if not window:
        raise MetricError(f"no speaker turns after the injection at debate turn {injection_turn}")
    return window[:size]


def sys_ar(transcript: Sequence[Turn], base: KeywordSet, injection_turn: int) -> tuple[float, int | None]:
    """(1 / recovery time, recovery time); (0.0, None) when no observed turn recovers."""
    for pos, turn in enumerate(observation_window(transcript, injection_turn), start=1):
        if count_hits(turn.text, base) >= RECOVERY_THRESHOLD:
            return 1.0 / pos, pos
    return 0.0, None


def ar_co(transcript: Sequence[Turn], valid: KeywordSet, injection_turn: int) -> float:
    window = observation_window(transcript, injection_turn)
    coherent = sum(1 for t in window if count_hits(t.text, valid) >= COHERENCE_THRESHOLD)
    return coherent / len(window)


# -- agent-level -----------------------------------------------------------------


@dataclass(frozen=True)
class RosterEntry:
    school: str
    team_id: str | None = None


Roster = Mapping[str, RosterEntry]


def _agent_turns(transcript: Sequence[Turn], roster: Roster, window: str, injection_turn: int | None):
    turns = speaker_turns(transcript)
    if window == "post":
        if injection_turn is None:
            raise MetricError("window 'post' needs an injection turn")
        turns = observation_window(transcript, injection_turn)
    elif window != "all":
        raise MetricError(f"unknown window {window!r}")
    by_agent: dict[str, list[Turn]] = {a: [] for a in roster}
    for t in turns:
        if t.speaker not in roster:
            raise MetricError(f"speaker {t.speaker} is missing from the roster")
        by_agent[t.speaker].append(t)
    return by_agent


def _mean(values: Iterable[float | None]) -> float | None:
    vals = [v for v in values if v is not None]
    return sum(vals) / len(vals) if vals else None


def doctrinal_accuracy(
    transcript: Sequence[Turn], lexicon: Lexicon, roster: Roster, window: str = "all",
    injection_turn: int | None = None,
) -> tuple[dict[str, float | None], float | None]:
    """Share of each agent's turns using at least two keywords of its own framework.

    Agents without Phase 3 turns get ``None`` (silent, not off-doctrine) and
    are left out of the unweighted mean.
    """
    per_agent: dict[str, float | None] = {}
    for agent, turns in _agent_turns(transcript, roster, window, injection_turn).items():
        fw = lexicon.framework(roster[agent].school)
        per_agent[agent] = (
            sum(1 for t in turns if count_hits(t.text, fw) >= DOCTRINE_THRESHOLD) / len(turns) if turns else None
        )
    return per_agent, _mean(per_agent.values())


def opposing_schools(agent: str, roster: Roster) -> set[str]:
    me = roster[agent]
    if me.team_id is None:
        return {r.school for a, r in roster.items() if a != agent and r.school != me.school}
    return {r.school for r in roster.values() if r.team_id is not None and r.team_id != me.team_id}


def cross_referencing(
    transcript: Sequence[Turn], lexicon: Lexicon, roster: Roster, window: str = "all",
    injection_turn: int | None = None, threshold: int = CROSS_REF_THRESHOLD,
) -> tuple[dict[str, float | None], float | None]:
    """Share of each agent's turns naming at least ``threshold`` keywords of an opposing framework."""
    per_agent: dict[str, float | None] = {}
    for agent, turns in _agent_turns(transcript, roster, window, injection_turn).items():
        sets = [lexicon.framework(s) for s in sorted(opposing_schools(agent, roster))]
        if not turns:
            per_agent[agent] = None
            continue
        hits = sum(1 for t in turns if any(count_hits(t.text, fw) >= threshold for fw in sets))
        per_agent[agent] = hits / len(turns)
    return per_agent, _mean(per_agent.values())


# -- reports ------------------------------------------------------------------------


@dataclass
class MetricReport:
    sys_ar: float | None = None
    recovery_time: int | None = None
    ar_co: float | None = None
    da_per_agent: dict[str, float | None] = field(default_factory=dict)
    da_mean: float | None = None
    cr_per_agent: dict[str, float | None] = field(default_factory=dict)
    cr_mean: float | None = None
    injection_turn: int | None = None
    observation_turns: list[int] = field(default_factory=list)
    keyword_digest: str = ""
    da_cr_window: str = "all"

    def to_json(self) -> dict:
        raw = {
            "sys_ar": self.sys_ar,
            "recovery_time": self.recovery_time,
            "ar_co": self.ar_co,
            "da_per_agent": self.da_per_agent,
            "da_mean": self.da_mean,
            "cr_per_agent": self.cr_per_agent,
            "cr_mean": self.cr_mean,
        }
        return {
            "raw": raw,
            "rounded": {
                k: ({a: round2(v) for a, v in val.items()} if isinstance(val, dict) else
                    val if k == "recovery_time" else round2(val))
                for k, val in raw.items()
            },
            "window": {"injection_debate_turn": self.injection_turn, "observation_turn_indices": self.observation_turns},
            "da_cr_window": self.da_cr_window,
            "keyword_digest": self.keyword_digest,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "MetricReport":
        raw = doc["raw"]
        return cls(
            sys_ar=raw["sys_ar"], recovery_time=raw["recovery_time"], ar_co=raw["ar_co"],
            da_per_agent=raw["da_per_agent"], da_mean=raw["da_mean"],
            cr_per_agent=raw["cr_per_agent"], cr_mean=raw["cr_mean"],
            injection_turn=doc["window"]["injection_debate_turn"],
            observation_turns=doc["window"]["observation_turn_indices"],
            keyword_digest=doc.get("keyword_digest", ""), da_cr_window=doc.get("da_cr_window", "all"),
        )


def evaluate(
    transcript: Sequence[Turn], lexicon: Lexicon, roster: Roster, injection_turn: int | None,
    da_cr_window: str = "all",
) -> MetricReport:
    """Compute every applicable metric for one transcript.

    Resilience metrics need an injection; DA/CR need a framework set for every
    speaking agent's school and are skipped otherwise.
    """
    report = MetricReport(injection_turn=injection_turn, keyword_digest=lexicon.digest, da_cr_window=da_cr_window)
    if injection_turn is not None:
        report.sys_ar, report.recovery_time = sys_ar(transcript, lexicon.base, injection_turn)
        report.ar_co = ar_co(transcript, lexicon.valid, injection_turn)
        report.observation_turns = [t.turn_index for t in observation_window(transcript, injection_turn)]
    if roster and all(r.school in lexicon.frameworks for r in roster.values()):
        report.da_per_agent, report.da_mean = doctrinal_accuracy(
            transcript, lexicon, roster, da_cr_window, injection_turn)
        report.cr_per_agent, report.cr_mean = cross_referencing(
            transcript, lexicon, roster, da_cr_window, injection_turn)
    return report


def annotate(transcript: Sequence[Turn], lexicon: Lexicon) -> None:
    """Fill each turn's keyword hit sets in place."""
    for t in transcript:
        t.annotations = {
            "base": sorted(matched_keywords(t.text, lexicon.base)),
            "valid": sorted(matched_keywords(t.text, lexicon.valid)),
            "frameworks": {
                s: sorted(hits) for s, fw in sorted(lexicon.frameworks.items())
                if (hits := matched_keywords(t.text, fw))
            },
        }


# -- ACS --------------------------------------------------------------------------


class Condition(str, enum.Enum):
    B_CHAT = "B_CHAT"
    B_SINGLE_RAG = "B_SINGLE_RAG"
    HOMO = "HOMO"
    HETERO = "HETERO"


CONDITION_LABELS = {
    Condition.B_CHAT: "B_Chat",
    Condition.B_SINGLE_RAG: "B_SingleRAG",
    Condition.HOMO: "Homo",
    Condition.HETERO: "Hetero",
}


@dataclass(frozen=True)
class AcsScore:
    perspective_range: int
    conceptual_sophistication: int
    argumentative_structuring: int

    def __post_init__(self) -> None:
        for name in ("perspective_range", "conceptual_sophistication", "argumentative_structuring"):
            if getattr(self, name) not in (0, 1, 2):
                raise MetricError(f"{name} must be 0, 1 or 2, got {getattr(self, name)!r}")

    @property
    def total(self) -> int:
        return self.perspective_range + self.conceptual_sophistication + self.argumentative_structuring


@dataclass(frozen=True)
class AcsRecord:
    participant_id: str
    condition: Condition
    pre: AcsScore
    post: AcsScore
    quiz: float
    stance_shift: float

    @property
    def gain(self) -> int:
        return self.post.total - self.pre.total


ACS_FIELDS = (
    "participant_id", "condition",
    "pre_perspective_range", "pre_conceptual_sophistication", "pre_argumentative_structuring",
    "post_perspective_range", "post_conceptual_sophistication", "post_argumentative_structuring",
    "quiz", "stance_shift",
)


def read_acs_csv(path: str | Path) -> list[AcsRecord]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = set(ACS_FIELDS) - set(reader.fieldnames or ())
        if missing:
            raise MetricError(f"{path}: missing columns {sorted(missing)}")
        records = []
        for row in reader:
            try:
                records.append(AcsRecord(
                    row["participant_id"],
                    Condition(row["condition"].strip().upper()),
                    AcsScore(int(row["pre_perspective_range"]), int(row["pre_conceptual_sophistication"]),
                             int(row["pre_argumentative_structuring"])),
                    AcsScore(int(row["post_perspective_range"]), int(row["post_conceptual_sophistication"]),
                             int(row["post_argumentative_structuring"])),
                    float(row["quiz"]),
                    float(row["stance_shift"]),
                ))
            except ValueError as exc:
                raise MetricError(f"{path}: row {reader.line_num}: {exc}") from None
    if not records:
        raise MetricError(f"{path}: no ACS records")
    return records


def cohens_d(treatment: Sequence[float], control: Sequence[float]) -> float | None:
    """Standardised mean difference using the pooled sample standard deviation."""
    n1, n2 = len(treatment), len(control)
    if n1 < 2 or n2 < 2:
        return None
    v1, v2 = statistics.variance(treatment), statistics.variance(control)
    pooled = math.sqrt(((n1 - 1) * v1 + (n2 - 1) * v2) / (n1 + n2 - 2))
    if pooled == 0:
        return None
    return (statistics.fmean(treatment) - statistics.fmean(control)) / pooled


@dataclass
class ConditionSummary:
    condition: Condition
    n: int
    delta_acs: float
    quiz: float
    stance_shift: float
    cohens_d: float | None = None


def acs_aggregate(records: Sequence[AcsRecord]) -> dict[Condition, ConditionSummary]:
    if not records:
        raise MetricError("no ACS records")
    groups: dict[Condition, list[AcsRecord]] = {}
    for r in records:
        groups.setdefault(r.condition, []).append(r)
    out = {}
    for cond in Condition:
        rs = groups.get(cond)
        if not rs:
            continue
        out[cond] = ConditionSummary(
            cond, len(rs),
            statistics.fmean(r.gain for r in rs),
            statistics.fmean(r.quiz for r in rs),
            statistics.fmean(r.stance_shift for r in rs),
        )
    if Condition.HETERO in out:
        baseline = [r.gain for r in records if r.condition is not Condition.HETERO]
        out[Condition.HETERO].cohens_d = cohens_d([r.gain for r in groups[Condition.HETERO]], baseline)
    return out
