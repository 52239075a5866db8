"""System presets, experiment plans, and the table builders for the harness."""

from __future__ import annotations

import csv
import enum
import io
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import yaml

from hde.config import (
    TROLLEY_DILEMMA,
    ConfigError,
    RunConfig,
    config_from_dict,
    data_root,
    load_config,
    parse_perturbation_id,
    resolve_path,
)
from hde.metrics import (
    CONDITION_LABELS,
    Condition,
    ConditionSummary,
    Lexicon,
    MetricReport,
    RosterEntry,
    evaluate,
    round2,
)
from hde.orchestrator import run_full_pipeline
from hde.retrieval import RetrievalIndex, build_index, load_manifest
from hde.transcript import Phase

# the C loader is an order of magnitude faster when libyaml is present
_YAML_LOADER = getattr(yaml, "CSafeLoader", yaml.SafeLoader)

log = logging.getLogger(__name__)


class Preset(str, enum.Enum):
    B_CHAT = "B_CHAT"
    B_SINGLE_RAG = "B_SINGLE_RAG"
    HOMO = "HOMO"
    HETERO_RESILIENCE = "HETERO_RESILIENCE"
    HETERO_PEDAGOGY = "HETERO_PEDAGOGY"


TEAMS = {
    Preset.HOMO: [
        ("ancient_virtue", ["aristotle", "plato"], "Ancient Virtue Ethics"),
        ("christian_virtue", ["aquinas", "augustine"], "Christian Virtue Ethics"),
    ],
    Preset.HETERO_RESILIENCE: [
        ("virtue_natural_law", ["aristotle", "aquinas"], "Virtue/Natural Law"),
        ("utilitarian", ["mill", "bentham"], "Utilitarian Consequentialism"),
    ],
    Preset.HETERO_PEDAGOGY: [
        ("deontology_natural_law", ["kant", "aquinas"], "Deontology/Natural Law"),
        ("utilitarian", ["mill", "bentham"], "Utilitarian Consequentialism"),
    ],
}

SYSTEM_LABELS = {
    Preset.B_CHAT: "B_Chat",
    Preset.B_SINGLE_RAG: "B_SingleRAG",
    Preset.HOMO: "Homo",
    Preset.HETERO_RESILIENCE: "Hetero",
    Preset.HETERO_PEDAGOGY: "Hetero",
}

VARIANTS = {
    (False, False): "Vanilla RAG Only",
    (True, False): "Vanilla + ID-RAG",
    (False, True): "Vanilla + ToM",
    (True, True): "Full System",
}


def preset_document(preset: Preset | str, perturbation: str | None = None, injection_turn: int = 4) -> dict:
    """A run-config document for one of the named system configurations."""
    preset = preset if isinstance(preset, Preset) else Preset(str(preset).upper())
    doc: dict = {
        "name": preset.value.lower(),
        "dilemma": TROLLEY_DILEMMA,
        "corpus_manifest": "pkg:corpora/manifest.yaml",
        "moderator": "pkg:identities/moderator.yaml",
        "backend": {"kind": "scripted"},
        "debate_length": 10,
        "perturbations": [],
    }
    if preset in TEAMS:
        doc["teams"] = [{"team_id": t, "agents": a, "stance_label": s} for t, a, s in TEAMS[preset]]
        doc["agents"] = {
            a: {"identity": f"pkg:identities/{a}.yaml", "weakness_map": f"pkg:weakness_maps/{a}.yaml"}
            for _, members, _ in TEAMS[preset] for a in members
        }
        doc["modules"] = {"id_rag_enabled": True, "tom_enabled": True}
    else:
        doc["teams"] = []
        doc["agents"] = {"tutor": {"identity": "pkg:identities/generic_tutor.yaml"}}
        if preset is Preset.B_SINGLE_RAG:
            # one generic agent retrieving over every corpus, unfiltered
            doc["modules"] = {"id_rag_enabled": False, "tom_enabled": False}
        else:
            doc["modules"] = {"id_rag_enabled": False, "tom_enabled": False,
                              "retrieval_enabled": False, "persona_enabled": False}
            doc.pop("corpus_manifest")
    if perturbation:
        doc["perturbations"] = [{"debate_turn": injection_turn, "id": parse_perturbation_id(perturbation).value}]
    return doc


def preset_config(preset: Preset | str, perturbation: str | None = None, **overrides) -> RunConfig:
    doc = preset_document(preset, perturbation)
    modules = doc.setdefault("modules", {})
    for key in ("id_rag_enabled", "tom_enabled"):
        if key in overrides:
            modules[key] = overrides.pop(key)
    doc.update(overrides)
    return config_from_dict(doc, data_root())


def roster_for(cfg: RunConfig, schools: dict[str, str]) -> dict[str, RosterEntry]:
    return {a: RosterEntry(schools[a], cfg.team_of(a)) for a in cfg.agents}


# -- plans ----------------------------------------------------------------------


@dataclass
class PlannedRun:
    run_id: str
    config: RunConfig
    system: str
    perturbation: str | None
    script: Path | None = None

    @property
    def variant(self) -> str:
        return VARIANTS[(self.config.id_rag_enabled, self.config.tom_enabled)]


@dataclass
class ExperimentPlan:
    name: str
    kind: str
    runs: list[PlannedRun]
    path: Path | None = None
    da_cr_window: str = "all"


def load_plan(path: str | Path, backend_kind: str | None = None) -> ExperimentPlan:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"plan not found: {path}")
    doc = yaml.load(path.read_text(encoding="utf-8"), Loader=_YAML_LOADER) or {}
    base = path.parent
    runs: list[PlannedRun] = []
    seen: set[str] = set()
    raw_runs = doc.get("runs") or []
    if not raw_runs:
        raise ConfigError(f"{path}: plan has no runs")
    for raw in raw_runs:
        run_id = str(raw["run_id"])
        if run_id in seen:
            raise ConfigError(f"{path}: duplicate run_id {run_id}")
        seen.add(run_id)
        pert = raw.get("perturbation")
        if "config" in raw:
            cfg = load_config(resolve_path(raw["config"], base))
            system = raw.get("system", cfg.name)
        else:
            preset = Preset(str(raw["preset"]).upper())
            cfg_doc = preset_document(preset, pert, int(raw.get("injection_turn", 4)))
            system = raw.get("system", SYSTEM_LABELS[preset])
            for key in ("debate_length", "dilemma", "deliberation_rounds", "window", "k", "max_hints"):
                if key in raw:
                    cfg_doc[key] = raw[key]
            cfg_doc["name"] = run_id
            cfg = config_from_dict(cfg_doc, data_root())
        overrides = {k: bool(raw[k]) for k in ("id_rag_enabled", "tom_enabled") if k in raw}
        script = resolve_path(raw.get("script"), base)
        if script is not None and not script.is_file():
            raise ConfigError(f"{path}: run {run_id}: script not found: {script}")
        backend = dict(cfg.backend)
        if backend_kind:
            backend["kind"] = backend_kind
        if script is not None:
            backend["script_path"] = str(script)
        cfg = cfg.with_overrides(backend=backend, **overrides)
        runs.append(PlannedRun(run_id, cfg, str(system), str(pert).upper()[:2] if pert else None, script))
    return ExperimentPlan(str(doc.get("name", path.stem)), str(doc.get("kind", "factorial")), runs, path,
                          str(doc.get("da_cr_window", "all")))


# -- execution --------------------------------------------------------------------


def run_and_score(
    cfg: RunConfig,
    lexicon: Lexicon,
    out_dir: str | Path | None,
    index: RetrievalIndex | None = None,
    backends=None,
    da_cr_window: str = "all",
    meta: dict | None = None,
) -> tuple[MetricReport, dict]:
    """Run one debate end to end and write ``metrics.json`` beside its transcript."""
    state, _, ctx = run_full_pipeline(cfg, out_dir, backends=backends, index=index)
    schools = {a: g.school for a, g in ctx.identities.items()}
    report = evaluate(state.transcript, lexicon, roster_for(cfg, schools), cfg.injection_turn, da_cr_window)
    doc = report.to_json()
    doc["run"] = {
        "name": cfg.name,
        "id_rag_enabled": cfg.id_rag_enabled,
        "tom_enabled": cfg.tom_enabled,
        "debate_length": cfg.debate_length,
        "perturbations": [{"debate_turn": t, "id": p.id.value} for t, p in cfg.perturbations],
        "temperature": cfg.temperature,
        "speaker_turns": sum(1 for t in state.transcript if t.phase is Phase.DEBATE and not t.is_moderator),
        **(meta or {}),
    }
    if out_dir is not None:
        Path(out_dir, "metrics.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return report, doc


def _shared_index(plan: ExperimentPlan) -> RetrievalIndex | None:
    manifests = {r.config.corpus_manifest for r in plan.runs if r.config.retrieval_enabled}
    if len(manifests) != 1:
        return None
    index, _ = build_index(load_manifest(manifests.pop()))
    return index


def execute_plan(plan: ExperimentPlan, lexicon: Lexicon, out_root: str | Path, jobs: int = 1) -> tuple[Path, list[dict]]:
    """Run every plan entry (``jobs`` at a time) and return the plan directory and per-run metric docs."""
    plan_dir = Path(out_root) / plan.name
    plan_dir.mkdir(parents=True, exist_ok=True)
    index = _shared_index(plan)

    def one(run: PlannedRun) -> dict:
        meta = {"run_id": run.run_id, "system": run.system, "perturbation": run.perturbation, "variant": run.variant}
        _, doc = run_and_score(run.config, lexicon, plan_dir / run.run_id, index=index,
                               da_cr_window=plan.da_cr_window, meta=meta)
        return doc

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            docs = list(pool.map(one, plan.runs))
    else:
        docs = [one(r) for r in plan.runs]
    (plan_dir / "plan.json").write_text(
        json.dumps({"name": plan.name, "kind": plan.kind, "runs": [r.run_id for r in plan.runs]}, indent=2) + "\n",
        encoding="utf-8",
    )
    return plan_dir, docs


def load_run_docs(plan_dir: str | Path) -> tuple[dict, list[dict]]:
    plan_dir = Path(plan_dir)
    meta_path = plan_dir / "plan.json"
    if not meta_path.is_file():
        raise ConfigError(f"{plan_dir}: no plan.json; not a harness output directory")
    meta = json.loads(meta_path.read_text(encoding="utf-8"))
    docs = [json.loads((plan_dir / r / "metrics.json").read_text(encoding="utf-8")) for r in meta["runs"]]
    return meta, docs


# -- tables -------------------------------------------------------------------------


def _fmt(value: float | None) -> str:
    return "" if value is None else f"{round2(value):.2f}"


def _signed(value: float | None) -> str:
    if value is None:
        return ""
    v = round2(value)
    return f"{'+' if v > 0 else '-' if v < 0 else ''}{abs(v):.2f}"


def _to_csv(rows: Sequence[Sequence[str]]) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def _mean(values):
    vals = [v for v in values if v is not None]
    return sum(vals) / len(vals) if vals else None


def resilience_rows(docs: Sequence[dict]) -> list[list[str]]:
    """Resilience table: one row per run, then ``Mean (<sys>)`` rows per system."""
    rows = [["System", "Pert.", "SysAR", "ArCo"]]
    systems: dict[str, list[dict]] = {}
    for d in docs:
        run = d["run"]
        rows.append([run["system"], run.get("perturbation") or "", _fmt(d["raw"]["sys_ar"]), _fmt(d["raw"]["ar_co"])])
        systems.setdefault(run["system"], []).append(d)
    for system, group in systems.items():
        rows.append([
            f"Mean ({system[:3]})", "",
            _fmt(_mean(g["raw"]["sys_ar"] for g in group)),
            _fmt(_mean(g["raw"]["ar_co"] for g in group)),
        ])
    return rows


@dataclass
class VariantSummary:
    label: str
    da: float | None
    cr: float | None
    ar_co: float | None
    runs: int = 0


def ablation_summary(docs: Sequence[dict]) -> list[VariantSummary]:
    out = []
    for label in VARIANTS.values():
        group = [d for d in docs if d["run"]["variant"] == label]
        if not group:
            continue
        out.append(VariantSummary(
            label,
            _mean(d["raw"]["da_mean"] for d in group),
            _mean(d["raw"]["cr_mean"] for d in group),
            _mean(d["raw"]["ar_co"] for d in group),
            len(group),
        ))
    return out


def percentage_points(module: VariantSummary, vanilla: VariantSummary, metric: str) -> int | None:
    """Difference of the two-decimal table values, in percentage points."""
    a, b = getattr(module, metric), getattr(vanilla, metric)
    if a is None or b is None:
        return None
    return int(round((round2(a) - round2(b)) * 100))


def _pp(value: int | None) -> str:
    return "" if value is None else f"{value:+d} pp"


def ablation_rows(docs: Sequence[dict]) -> list[list[str]]:
    """Ablation table: per-variant means, then module deltas over the vanilla variant."""
    summary = ablation_summary(docs)
    rows = [["Condition", "DA", "CR", "ArCo"]]
    rows += [[s.label, _fmt(s.da), _fmt(s.cr), _fmt(s.ar_co)] for s in summary]
    by_label = {s.label: s for s in summary}
    vanilla = by_label.get(VARIANTS[(False, False)])
    if vanilla:
        for name, key in (("ID-RAG", (True, False)), ("ToM", (False, True))):
            mod = by_label.get(VARIANTS[key])
            if mod:
                rows.append([f"Δ ({name})", _pp(percentage_points(mod, vanilla, "da")),
                             _pp(percentage_points(mod, vanilla, "cr")), "---"])
    return rows


def acs_rows(summary: dict[Condition, ConditionSummary]) -> list[list[str]]:
    """Learning-outcome table plus Cohen's d (Hetero against the pooled baselines)."""
    rows = [["Condition", "N", "ΔACS", "Quiz", "Shift", "Cohen's d"]]
    for cond, s in summary.items():
        rows.append([CONDITION_LABELS[cond], str(s.n), _signed(s.delta_acs), _fmt(s.quiz), _fmt(s.stance_shift),
                     _fmt(s.cohens_d)])
    return rows


def rows_for(kind: str, docs: Sequence[dict]) -> list[list[str]]:
    if kind == "ablation":
        return ablation_rows(docs)
    return resilience_rows(docs)


def write_table(rows: Sequence[Sequence[str]], path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(_to_csv(rows), encoding="utf-8")
    return path
