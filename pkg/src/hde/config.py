"""Run configuration: teams, agent bindings, schedule and module toggles."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

import yaml

# the C loader is an order of magnitude faster when libyaml is present
_YAML_LOADER = getattr(yaml, "CSafeLoader", yaml.SafeLoader)

PKG_PREFIX = "pkg:"

TROLLEY_DILEMMA = (
    "A runaway trolley is heading towards five people tied to the track. You stand next to a lever "
    "that would divert it onto a side track, where it will kill one person instead. "
    "Should you pull the lever?"
)


class ConfigError(ValueError):
    pass


class PerturbationId(str, enum.Enum):
    P1_PUSH_VS_LEVER = "P1_PUSH_VS_LEVER"
    P2_TYRANT_ARGUMENT = "P2_TYRANT_ARGUMENT"
    P3_SCIENTIST_VS_KILLERS = "P3_SCIENTIST_VS_KILLERS"
    CUSTOM = "CUSTOM"


PERTURBATION_TEXTS = {
    PerturbationId.P1_PUSH_VS_LEVER: (
        "Is there a moral difference between pulling a lever and physically pushing someone?"
    ),
    PerturbationId.P2_TYRANT_ARGUMENT: (
        "Historical tyrants claimed to act for the greater good. "
        "Does utilitarian logic risk justifying atrocities?"
    ),
    PerturbationId.P3_SCIENTIST_VS_KILLERS: (
        "Suppose the five are convicted murderers, the one a cancer-curing scientist. "
        "Does this change the calculation?"
    ),
}

SHORT_IDS = {"P1": PerturbationId.P1_PUSH_VS_LEVER, "P2": PerturbationId.P2_TYRANT_ARGUMENT,
             "P3": PerturbationId.P3_SCIENTIST_VS_KILLERS}


@dataclass(frozen=True)
class PerturbationSpec:
    id: PerturbationId
    text: str

    @classmethod
    def named(cls, pid: str | PerturbationId) -> "PerturbationSpec":
        pid = parse_perturbation_id(pid)
        if pid is PerturbationId.CUSTOM:
            raise ConfigError("CUSTOM perturbations need explicit text")
        return cls(pid, PERTURBATION_TEXTS[pid])

    @property
    def short(self) -> str:
        return self.id.value.split("_", 1)[0] if self.id is not PerturbationId.CUSTOM else "CUSTOM"


def parse_perturbation_id(pid: str | PerturbationId) -> PerturbationId:
    if isinstance(pid, PerturbationId):
        return pid
    key = str(pid).upper()
    if key in SHORT_IDS:
        return SHORT_IDS[key]
    try:
        return PerturbationId(key)
    except ValueError:
        raise ConfigError(f"unknown perturbation {pid!r}") from None


@dataclass(frozen=True)
class TeamConfig:
    team_id: str
    agent_ids: tuple[str, ...]
    stance_label: str = ""


@dataclass(frozen=True)
class AgentBinding:
    agent_id: str
    identity: Path
    corpora: tuple[str, ...] | None = None
    weakness_map: Path | None = None


@dataclass
class RunConfig:
    name: str
    dilemma: str
    teams: list[TeamConfig]
    agents: dict[str, AgentBinding]
    corpus_manifest: Path | None
    moderator_identity: Path | None
    backend: dict = field(default_factory=lambda: {"kind": "scripted"})
    debate_length: int = 10
    perturbations: list[tuple[int, PerturbationSpec]] = field(default_factory=list)
    id_rag_enabled: bool = True
    tom_enabled: bool = True
    retrieval_enabled: bool = True
    persona_enabled: bool = True
    share_team_corpora: bool = False
    deliberation_rounds: int = 2
    window: int = 6
    k: int = 4
    max_hints: int = 2
    wm_capacity: int = 40
    temperature: float = 0.2
    max_output_tokens: int = 400
    seed_order: tuple[str, ...] | None = None
    base_dir: Path = Path(".")

    @property
    def monologue(self) -> bool:
        return not self.teams

    @property
    def roster(self) -> list[str]:
        if self.monologue:
            return list(self.agents)
        return [a for t in self.ordered_teams() for a in t.agent_ids]

    def ordered_teams(self) -> list[TeamConfig]:
        if not self.seed_order:
            return list(self.teams)
        by_id = {t.team_id: t for t in self.teams}
        head = [by_id[t] for t in self.seed_order if t in by_id]
        return head + [t for t in self.teams if t not in head]

    def team_of(self, agent_id: str) -> str | None:
        for t in self.teams:
            if agent_id in t.agent_ids:
                return t.team_id
        return None

    @property
    def injection_turn(self) -> int | None:
        return self.perturbations[0][0] if self.perturbations else None

    def with_overrides(self, **kw) -> "RunConfig":
        cfg = replace(self, **kw)
        validate(cfg)
        return cfg


def data_root() -> Path:
    return Path(str(resources.files("hde.data")))


def resolve_path(value: str | Path | None, base_dir: Path) -> Path | None:
    if value is None:
        return None
    value = str(value)
    if value.startswith(PKG_PREFIX):
        return data_root() / value[len(PKG_PREFIX):]
    p = Path(value)
    return p if p.is_absolute() else base_dir / p


def validate(cfg: RunConfig) -> None:
    if not cfg.agents:
        raise ConfigError(f"{cfg.name}: no agents configured")
    if cfg.monologue and len(cfg.agents) != 1:
        raise ConfigError(f"{cfg.name}: a config without teams must bind exactly one agent")
    seen: dict[str, str] = {}
    for team in cfg.teams:
        if not team.agent_ids:
            raise ConfigError(f"{cfg.name}: team {team.team_id} has no agents")
        for a in team.agent_ids:
            if a in seen:
                raise ConfigError(f"{cfg.name}: agent {a} appears in teams {seen[a]} and {team.team_id}")
            seen[a] = team.team_id
            if a not in cfg.agents:
                raise ConfigError(f"{cfg.name}: agent {a} has no identity binding")
    if len({t.team_id for t in cfg.teams}) != len(cfg.teams):
        raise ConfigError(f"{cfg.name}: duplicate team ids")
    if cfg.debate_length < 1:
        raise ConfigError(f"{cfg.name}: debate_length must be >= 1")
    for turn, _ in cfg.perturbations:
        if not 0 <= turn < cfg.debate_length:
            raise ConfigError(f"{cfg.name}: perturbation at debate turn {turn} leaves no turns to observe")
    if cfg.deliberation_rounds < 0 or cfg.window < 1 or cfg.k < 1 or cfg.max_hints < 1 or cfg.wm_capacity < 1:
        raise ConfigError(f"{cfg.name}: rounds/window/k/max_hints/capacity out of range")
    if cfg.retrieval_enabled and cfg.corpus_manifest is None:
        raise ConfigError(f"{cfg.name}: retrieval enabled but no corpus_manifest given")


def config_from_dict(doc: dict, base_dir: str | Path = ".") -> RunConfig:
    base_dir = Path(base_dir)
    if not isinstance(doc, dict):
        raise ConfigError("run config must be a mapping")
    try:
        agents = {}
        for agent_id, raw in (doc.get("agents") or {}).items():
            if "identity" not in raw:
                raise ConfigError(f"agent {agent_id}: missing identity")
            agents[agent_id] = AgentBinding(
                agent_id,
                resolve_path(raw["identity"], base_dir),
                tuple(raw["corpora"]) if raw.get("corpora") is not None else None,
                resolve_path(raw.get("weakness_map"), base_dir),
            )
        teams = [
            TeamConfig(str(t["team_id"]), tuple(t["agents"]), str(t.get("stance_label", "")))
            for t in doc.get("teams") or []
        ]
        schedule = []
        for p in doc.get("perturbations") or []:
            pid = parse_perturbation_id(p.get("id", "CUSTOM"))
            text = p.get("text") or (PERTURBATION_TEXTS.get(pid) if pid is not PerturbationId.CUSTOM else None)
            if not text:
                raise ConfigError("CUSTOM perturbation without text")
            schedule.append((int(p["debate_turn"]), PerturbationSpec(pid, text)))
        modules = doc.get("modules") or {}
        seed = doc.get("seed_order")
        cfg = RunConfig(
            name=str(doc.get("name", "debate")),
            dilemma=str(doc.get("dilemma") or TROLLEY_DILEMMA).strip(),
            teams=teams,
            agents=agents,
            corpus_manifest=resolve_path(doc.get("corpus_manifest"), base_dir),
            moderator_identity=resolve_path(doc.get("moderator"), base_dir),
            backend=dict(doc.get("backend") or {"kind": "scripted"}),
            debate_length=int(doc.get("debate_length", 10)),
            perturbations=schedule,
            id_rag_enabled=bool(modules.get("id_rag_enabled", doc.get("id_rag_enabled", True))),
            tom_enabled=bool(modules.get("tom_enabled", doc.get("tom_enabled", True))),
            retrieval_enabled=bool(modules.get("retrieval_enabled", True)),
            persona_enabled=bool(modules.get("persona_enabled", True)),
            share_team_corpora=bool(doc.get("share_team_corpora", False)),
            deliberation_rounds=int(doc.get("deliberation_rounds", 2)),
            window=int(doc.get("window", 6)),
            k=int(doc.get("k", 4)),
            max_hints=int(doc.get("max_hints", 2)),
            wm_capacity=int(doc.get("wm_capacity", 40)),
            temperature=float(doc.get("temperature", 0.2)),
            max_output_tokens=int(doc.get("max_output_tokens", 400)),
            seed_order=tuple(seed) if seed else None,
            base_dir=base_dir,
        )
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"malformed run config: {exc}") from None
    validate(cfg)
    return cfg


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config not found: {path}")
    try:
        doc = yaml.load(path.read_text(encoding="utf-8"), Loader=_YAML_LOADER)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return config_from_dict(doc, path.parent)
