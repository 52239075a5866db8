from __future__ import annotations

import ast
from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

import hde.tom
from hde.tom import (
    WeaknessEntry,
    WeaknessMap,
    WeaknessMapError,
    load_weakness_map,
    select_hints,
    weakness_map_from_dict,
)

PHILOSOPHERS = {
    "kant": "DEONTOLOGY", "mill": "UTILITARIANISM", "bentham": "UTILITARIANISM", "aristotle": "VIRTUE_ANCIENT",
    "plato": "VIRTUE_ANCIENT", "aquinas": "NATURAL_LAW", "augustine": "VIRTUE_CHRISTIAN",
}


def entry(target: str, *triggers: str, hint: str = "h") -> WeaknessEntry:
    return WeaknessEntry(target, "weak spot", tuple(triggers), hint)


def sample_map() -> WeaknessMap:
    return WeaknessMap("kant", (
        entry("UTILITARIANISM", "greatest happiness", "five lives", hint="separateness"),
        entry("UTILITARIANISM", "greater good", "utility", hint="tyrant"),
        entry("UTILITARIANISM", "outcome", hint="outcome"),
        entry("VIRTUE_ANCIENT", "golden mean", hint="no procedure"),
    ), "DEONTOLOGY")


def test_best_scoring_entries_first():
    hints = select_hints(sample_map(), "For the greater good, utility and five lives count.", "UTILITARIANISM")
    assert [h.counter_hint for h in hints] == ["tyrant", "separateness"]


def test_ties_keep_map_order():
    hints = select_hints(sample_map(), "greatest happiness, greater good, outcome", "UTILITARIANISM", max_hints=3)
    assert [h.counter_hint for h in hints] == ["separateness", "tyrant", "outcome"]


def test_only_targeted_school_considered():
    assert select_hints(sample_map(), "the golden mean", "UTILITARIANISM") == []
    assert [h.counter_hint for h in select_hints(sample_map(), "the golden mean", "VIRTUE_ANCIENT")] == ["no procedure"]


def test_no_trigger_no_hint():
    assert select_hints(sample_map(), "Nothing relevant here.", "UTILITARIANISM") == []


def test_empty_turn_rejected():
    with pytest.raises(ValueError):
        select_hints(sample_map(), "  ", "UTILITARIANISM")


def test_matching_ignores_case_and_spacing():
    assert select_hints(sample_map(), "The  GREATER\ngood", "UTILITARIANISM")


def test_entry_without_triggers_rejected():
    with pytest.raises(WeaknessMapError):
        WeaknessMap("kant", (entry("UTILITARIANISM"),))


def test_entry_targeting_own_school_rejected():
    with pytest.raises(WeaknessMapError, match="own school"):
        weakness_map_from_dict({"owner_agent_id": "kant", "entries": [
            {"target_school": "deontology", "weakness_text": "w", "trigger_patterns": ["x"], "counter_hint": "h"}
        ]}, owner_school="DEONTOLOGY")


def test_missing_field_named():
    with pytest.raises(WeaknessMapError, match="counter_hint"):
        weakness_map_from_dict({"owner_agent_id": "k", "entries": [
            {"target_school": "X", "weakness_text": "w", "trigger_patterns": ["x"]}
        ]})


@pytest.mark.parametrize("agent,school", sorted(PHILOSOPHERS.items()))
def test_bundled_maps_cover_other_schools(data_dir, agent, school):
    wmap = load_weakness_map(data_dir / "weakness_maps" / f"{agent}.yaml", school)
    targets = {e.target_school for e in wmap.entries}
    assert school not in targets
    assert len(targets) >= 3


def test_no_dependency_on_identity_module():
    tree = ast.parse(Path(hde.tom.__file__).read_text())
    imported = set()
    for node in ast.walk(tree):
        if isinstance(node, ast.Import):
            imported |= {a.name for a in node.names}
        elif isinstance(node, ast.ImportFrom):
            imported.add(node.module or "")
    assert not any(m == "hde.identity" or m.startswith("hde.") for m in imported)


@given(st.text(alphabet="abcdefg outilyrehapns", min_size=1, max_size=60).filter(str.strip), st.integers(1, 4))
def test_hints_bounded_and_triggered(text, k):
    hints = select_hints(sample_map(), text, "UTILITARIANISM", max_hints=k)
    assert len(hints) <= k
    assert all(h.score(text) >= 1 and h.target_school == "UTILITARIANISM" for h in hints)
    scores = [h.score(text) for h in hints]
    assert scores == sorted(scores, reverse=True)
