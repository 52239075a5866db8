from __future__ import annotations

import csv
import json

import pytest
import yaml

from hde.config import ConfigError, PerturbationSpec, config_from_dict, load_config, parse_perturbation_id
from hde.harness import (
    Preset,
    VariantSummary,
    ablation_rows,
    acs_rows,
    execute_plan,
    load_plan,
    load_run_docs,
    percentage_points,
    preset_config,
    resilience_rows,
    write_table,
)
from hde.metrics import acs_aggregate, read_acs_csv


def test_presets_match_team_layouts():
    hetero = preset_config(Preset.HETERO_RESILIENCE)
    assert [t.agent_ids for t in hetero.teams] == [("aristotle", "aquinas"), ("mill", "bentham")]
    pedagogy = preset_config("hetero_pedagogy")
    assert pedagogy.teams[0].agent_ids == ("kant", "aquinas")
    homo = preset_config("HOMO")
    assert [t.stance_label for t in homo.teams] == ["Ancient Virtue Ethics", "Christian Virtue Ethics"]


def test_baseline_presets_are_single_agent():
    rag = preset_config("B_SINGLE_RAG")
    chat = preset_config("B_CHAT")
    assert rag.monologue and not rag.id_rag_enabled and not rag.tom_enabled and rag.retrieval_enabled
    assert chat.monologue and not chat.retrieval_enabled and not chat.persona_enabled


def test_preset_perturbation_at_turn_four():
    cfg = preset_config("HOMO", "P2")
    assert cfg.injection_turn == 4
    assert cfg.perturbations[0][1] == PerturbationSpec.named("P2_TYRANT_ARGUMENT")


def test_perturbation_ids():
    assert parse_perturbation_id("p3").value == "P3_SCIENTIST_VS_KILLERS"
    with pytest.raises(ConfigError):
        parse_perturbation_id("P9")
    assert PerturbationSpec.named("P1").short == "P1"


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_config(tmp_path / "nope.yaml")


def test_custom_perturbation_needs_text():
    doc = {"teams": [], "agents": {"tutor": {"identity": "pkg:identities/generic_tutor.yaml"}},
           "modules": {"retrieval_enabled": False}, "perturbations": [{"debate_turn": 2, "id": "CUSTOM"}]}
    with pytest.raises(ConfigError, match="CUSTOM"):
        config_from_dict(doc)
    doc["perturbations"][0]["text"] = "What if the lever is broken?"
    assert config_from_dict(doc).perturbations[0][1].text == "What if the lever is broken?"


def test_example_config_loads(data_dir):
    cfg = load_config(data_dir / "configs" / "hetero_p1.yaml")
    assert cfg.injection_turn == 4 and cfg.backend["kind"] == "scripted"


def _plan(tmp_path, runs):
    path = tmp_path / "plan.yaml"
    path.write_text(yaml.safe_dump({"name": "mini", "runs": runs}))
    return path


def test_duplicate_run_id_rejected(tmp_path, data_dir):
    script = str(data_dir / "scripts" / "factorial" / "hetero_p1.yaml")
    run = {"run_id": "x", "preset": "HETERO_RESILIENCE", "perturbation": "P1", "script": script}
    with pytest.raises(ConfigError, match="duplicate"):
        load_plan(_plan(tmp_path, [run, run]))


def test_missing_script_rejected(tmp_path):
    run = {"run_id": "x", "preset": "HOMO", "perturbation": "P1", "script": "missing.yaml"}
    with pytest.raises(ConfigError, match="script not found"):
        load_plan(_plan(tmp_path, [run]))


def test_single_run_plan(tmp_path, data_dir, lexicon):
    script = str(data_dir / "scripts" / "factorial" / "hetero_p1.yaml")
    plan = load_plan(_plan(tmp_path, [{"run_id": "only", "preset": "HETERO_RESILIENCE",
                                       "perturbation": "P1", "script": script}]))
    plan_dir, docs = execute_plan(plan, lexicon, tmp_path / "out")
    rows = resilience_rows(docs)
    assert rows == [["System", "Pert.", "SysAR", "ArCo"], ["Hetero", "P1", "0.50", "1.00"],
                    ["Mean (Het)", "", "0.50", "1.00"]]
    for name in ("transcript.jsonl", "audit.jsonl", "metrics.json"):
        assert (plan_dir / "only" / name).is_file()
    meta, again = load_run_docs(plan_dir)
    assert meta["runs"] == ["only"] and again == docs


def test_parallel_jobs_match_serial(tmp_path, data_dir, lexicon):
    plan = load_plan(data_dir / "plans" / "factorial.yaml")
    _, serial = execute_plan(plan, lexicon, tmp_path / "serial", jobs=1)
    _, parallel = execute_plan(plan, lexicon, tmp_path / "parallel", jobs=4)
    assert serial == parallel
    for run in plan.runs:
        a = (tmp_path / "serial" / "factorial" / run.run_id / "transcript.jsonl").read_bytes()
        b = (tmp_path / "parallel" / "factorial" / run.run_id / "transcript.jsonl").read_bytes()
        assert a == b


def test_metrics_json_carries_run_metadata(tmp_path, data_dir, lexicon):
    plan = load_plan(data_dir / "plans" / "ablation.yaml")
    plan.runs = plan.runs[:1]
    plan_dir, docs = execute_plan(plan, lexicon, tmp_path)
    doc = json.loads((plan_dir / plan.runs[0].run_id / "metrics.json").read_text())
    assert doc["run"]["variant"] == "Vanilla RAG Only"
    assert doc["run"]["debate_length"] == 18 and doc["run"]["speaker_turns"] == 18
    assert set(doc["raw"]["da_per_agent"]) == {"kant", "aquinas", "mill", "bentham"}


def test_percentage_points_use_table_values():
    vanilla = VariantSummary("v", 0.505, 0.05, 1.0)
    module = VariantSummary("m", 0.9, 0.25, 1.0)
    assert percentage_points(module, vanilla, "da") == 39
    assert percentage_points(module, vanilla, "cr") == 20


def test_ablation_rows_layout():
    def doc(variant, da, cr):
        return {"run": {"variant": variant}, "raw": {"da_mean": da, "cr_mean": cr, "ar_co": 1.0}}

    rows = ablation_rows([doc("Vanilla RAG Only", 0.5, 0.1), doc("Vanilla + ToM", 0.75, 0.3)])
    assert rows[0] == ["Condition", "DA", "CR", "ArCo"]
    assert rows[-1] == ["Δ (ToM)", "+25 pp", "+20 pp", "---"]
    assert len(rows) == 4


def test_acs_rows_from_bundled_scores(data_dir, tmp_path):
    rows = acs_rows(acs_aggregate(read_acs_csv(data_dir / "acs" / "scores.csv")))
    assert rows[0] == ["Condition", "N", "ΔACS", "Quiz", "Shift", "Cohen's d"]
    assert [r[2] for r in rows[1:]] == ["+0.20", "+0.40", "-0.29", "+2.20"]
    path = write_table(rows, tmp_path / "t.csv")
    assert list(csv.reader(path.open(encoding="utf-8"))) == rows
