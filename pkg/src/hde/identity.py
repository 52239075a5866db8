"""Agent identity: belief graphs, negative constraints and constraint-filtered working memory."""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import yaml

# the C loader is an order of magnitude faster when libyaml is present
_YAML_LOADER = getattr(yaml, "CSafeLoader", yaml.SafeLoader)


class IdentityError(ValueError):
    """Raised when an identity file is malformed or violates a graph invariant."""


class NodeKind(str, enum.Enum):
    BELIEF = "BELIEF"
    VALUE = "VALUE"


class MatchMode(str, enum.Enum):
    ANY_PHRASE = "ANY_PHRASE"
    ALL_PHRASES = "ALL_PHRASES"


class MemorySource(str, enum.Enum):
    TRANSCRIPT = "TRANSCRIPT"
    RETRIEVED_FACT = "RETRIEVED_FACT"
    TOM_HINT = "TOM_HINT"
    MODERATOR = "MODERATOR"


_WS = re.compile(r"\s+")


def normalize_text(text: str) -> str:
    """Lowercase and collapse runs of whitespace to single spaces."""
    return _WS.sub(" ", text.lower()).strip()


@dataclass(frozen=True)
class BeliefNode:
    id: str
    kind: NodeKind
    statement: str
    gamma: float
    core: bool = False

    def __post_init__(self) -> None:
        if not 0.0 <= self.gamma <= 1.0:
            raise IdentityError(f"node {self.id!r}: gamma must be in [0, 1], got {self.gamma}")
        if self.core and self.gamma != 1.0:
            raise IdentityError(f"node {self.id!r}: core nodes require gamma = 1.0")


@dataclass(frozen=True)
class NegativeConstraint:
    id: str
    label: str
    patterns: tuple[str, ...]
    match_mode: MatchMode = MatchMode.ANY_PHRASE

    def __post_init__(self) -> None:
        if not self.patterns:
            raise IdentityError(f"constraint {self.id!r}: patterns must be non-empty")
        cleaned = tuple(normalize_text(p) for p in self.patterns)
        if any(not p for p in cleaned):
            raise IdentityError(f"constraint {self.id!r}: empty pattern")
        object.__setattr__(self, "patterns", cleaned)


@dataclass(frozen=True)
class Edge:
    source: str
    target: str
    relation: str


@dataclass(frozen=True)
class IdentityGraph:
    agent_id: str
    school: str
    persona_summary: str
    nodes: tuple[BeliefNode, ...] = ()
    edges: tuple[Edge, ...] = ()
    constraints: tuple[NegativeConstraint, ...] = ()
    name: str | None = None

    def __post_init__(self) -> None:
        ids = [n.id for n in self.nodes]
        if len(set(ids)) != len(ids):
            raise IdentityError(f"{self.agent_id}: duplicate node ids")
        known = set(ids)
        missing = sorted({e.source for e in self.edges} - known | {e.target for e in self.edges} - known)
        if missing:
            raise IdentityError(f"{self.agent_id}: dangling edge endpoints {missing}")
        if self.nodes and not any(n.core for n in self.nodes):
            raise IdentityError(f"{self.agent_id}: a non-empty graph needs at least one core node")

    @property
    def display_name(self) -> str:
        return self.name or self.agent_id.replace("_", " ").title()

    @property
    def core_nodes(self) -> tuple[BeliefNode, ...]:
        return tuple(n for n in self.nodes if n.core)

    def stats(self) -> dict[str, int]:
        return {
            "nodes": len(self.nodes),
            "core_beliefs": len(self.core_nodes),
            "edges": len(self.edges),
            "constraints": len(self.constraints),
        }

    def persona_only(self) -> "IdentityGraph":
        """The same agent stripped of its belief graph and doctrinal boundaries."""
        return replace(self, nodes=(), edges=(), constraints=())


@dataclass(frozen=True)
class MemoryEntry:
    source: MemorySource
    text: str
    origin_ref: str | None = None


@dataclass(frozen=True)
class WorkingMemory:
    entries: tuple[MemoryEntry, ...] = ()
    capacity: int = 40

    def __post_init__(self) -> None:
        if self.capacity < 1:
            raise ValueError("capacity must be positive")
        if len(self.entries) > self.capacity:
            # oldest first; core beliefs live in the identity graph, never here
            object.__setattr__(self, "entries", tuple(self.entries[-self.capacity:]))

    def __len__(self) -> int:
        return len(self.entries)

    def append(self, entries: Iterable[MemoryEntry]) -> "WorkingMemory":
        return WorkingMemory(self.entries + tuple(entries), self.capacity)

    def of_source(self, source: MemorySource) -> list[MemoryEntry]:
        return [e for e in self.entries if e.source == source]


def violates(fact: MemoryEntry, constraint: NegativeConstraint) -> bool:
    """True when the fact text matches the constraint's phrases.

    Matching is phrase containment on lowercased, whitespace-collapsed text.
    ``ANY_PHRASE`` needs one pattern present, ``ALL_PHRASES`` needs every one.
    """
    text = normalize_text(fact.text)
    if not text:
        raise ValueError("fact text must be non-empty")
    hits = (p in text for p in constraint.patterns)
    if constraint.match_mode is MatchMode.ALL_PHRASES:
        return all(hits)
    return any(hits)


def filter_and_merge(
    wm: WorkingMemory,
    retrieved: Sequence[MemoryEntry],
    constraints: Sequence[NegativeConstraint],
) -> WorkingMemory:
    """Append retrieved facts that break no constraint, then evict down to capacity."""
    for entry in retrieved:
        if entry.source is not MemorySource.RETRIEVED_FACT:
            raise ValueError(f"expected RETRIEVED_FACT entries, got {entry.source.value}")
    kept = [f for f in retrieved if not any(violates(f, n) for n in constraints)]
    return wm.append(kept)


# -- loading -----------------------------------------------------------------


def _require(doc: dict, key: str, where: str):
    if key not in doc:
        raise IdentityError(f"{where}: missing field {key!r}")
    return doc[key]


def _enum(cls, value, where: str):
    try:
        return cls(str(value).upper())
    except ValueError:
        allowed = ", ".join(m.value for m in cls)
        raise IdentityError(f"{where}: {value!r} is not one of {allowed}") from None


def identity_from_dict(doc: dict, source: str = "<identity>") -> IdentityGraph:
    if not isinstance(doc, dict):
        raise IdentityError(f"{source}: top level must be a mapping")
    nodes = []
    for i, raw in enumerate(doc.get("nodes") or []):
        where = f"{source}: nodes[{i}]"
        try:
            gamma = float(_require(raw, "gamma", where))
        except (TypeError, ValueError):
            raise IdentityError(f"{where}.gamma: not a number") from None
        if not 0.0 <= gamma <= 1.0:
            raise IdentityError(f"{where}.gamma: {gamma} outside [0, 1]")
        nodes.append(
            BeliefNode(
                id=str(_require(raw, "id", where)),
                kind=_enum(NodeKind, _require(raw, "kind", where), f"{where}.kind"),
                statement=str(_require(raw, "statement", where)),
                gamma=gamma,
                core=bool(raw.get("core", False)),
            )
        )
    edges = []
    for i, raw in enumerate(doc.get("edges") or []):
        where = f"{source}: edges[{i}]"
        edges.append(
            Edge(
                str(_require(raw, "from", where)),
                str(_require(raw, "to", where)),
                str(raw.get("relation", "related")),
            )
        )
    constraints = []
    for i, raw in enumerate(doc.get("constraints") or []):
        where = f"{source}: constraints[{i}]"
        patterns = _require(raw, "patterns", where)
        if not isinstance(patterns, list) or not patterns:
            raise IdentityError(f"{where}.patterns: must be a non-empty list")
        constraints.append(
            NegativeConstraint(
                id=str(_require(raw, "id", where)),
                label=str(_require(raw, "label", where)),
                patterns=tuple(str(p) for p in patterns),
                match_mode=_enum(MatchMode, raw.get("match_mode", "ANY_PHRASE"), f"{where}.match_mode"),
            )
        )
    try:
        return IdentityGraph(
            agent_id=str(_require(doc, "agent_id", source)),
            school=str(_require(doc, "school", source)).upper(),
            persona_summary=str(_require(doc, "persona_summary", source)).strip(),
            nodes=tuple(nodes),
            edges=tuple(edges),
            constraints=tuple(constraints),
            name=doc.get("name"),
        )
    except IdentityError as exc:
        raise IdentityError(f"{source}: {exc}") from None


def load_identity(path: str | Path) -> IdentityGraph:
    path = Path(path)
    try:
        doc = yaml.load(path.read_text(encoding="utf-8"), Loader=_YAML_LOADER)
    except yaml.YAMLError as exc:
        raise IdentityError(f"{path}: unparseable identity file: {exc}") from None
    return identity_from_dict(doc, str(path))


def identity_to_dict(graph: IdentityGraph) -> dict:
    doc = {
        "agent_id": graph.agent_id,
        "school": graph.school,
        "persona_summary": graph.persona_summary,
        "nodes": [
            {"id": n.id, "kind": n.kind.value, "statement": n.statement, "gamma": n.gamma, "core": n.core}
            for n in graph.nodes
        ],
        "edges": [{"from": e.source, "to": e.target, "relation": e.relation} for e in graph.edges],
        "constraints": [
            {"id": c.id, "label": c.label, "patterns": list(c.patterns), "match_mode": c.match_mode.value}
            for c in graph.constraints
        ],
    }
    if graph.name:
        doc["name"] = graph.name
    return doc
