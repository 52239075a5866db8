"""Shared builders for orchestration tests: random run configs and invariant checks."""

from __future__ import annotations

from hypothesis import strategies as st

from hde.backend import ScriptedBackend
from hde.config import RunConfig, config_from_dict, data_root
from hde.metrics import observation_window
from hde.transcript import MODERATOR, Phase, Turn

PHILOSOPHERS = ("kant", "mill", "bentham", "aristotle", "plato", "aquinas", "augustine")


def catch_all(n: int = 200) -> ScriptedBackend:
    return ScriptedBackend([("*", f"Response number {i} on the question.") for i in range(n)])


def make_config(teams: list[list[str]], length: int, inject: int | None, rounds: int = 2,
                id_rag: bool = True, tom: bool = True, retrieval: bool = True) -> RunConfig:
    agents = sorted({a for t in teams for a in t})
    doc = {
        "name": "prop",
        "teams": [{"team_id": f"t{i}", "agents": members} for i, members in enumerate(teams)],
        "agents": {a: {"identity": f"pkg:identities/{a}.yaml", "weakness_map": f"pkg:weakness_maps/{a}.yaml"}
                   for a in agents},
        "corpus_manifest": "pkg:corpora/manifest.yaml",
        "moderator": "pkg:identities/moderator.yaml",
        "debate_length": length,
        "deliberation_rounds": rounds,
        "perturbations": [] if inject is None else [{"debate_turn": inject, "id": "P1"}],
        "modules": {"id_rag_enabled": id_rag, "tom_enabled": tom, "retrieval_enabled": retrieval},
    }
    return config_from_dict(doc, data_root())


@st.composite
def run_configs(draw) -> RunConfig:
    pool = list(draw(st.permutations(PHILOSOPHERS)))
    n_teams = draw(st.integers(1, 3))
    teams = []
    for _ in range(n_teams):
        size = draw(st.integers(1, 2))
        teams.append([pool.pop() for _ in range(size)])
    length = draw(st.integers(1, 20))
    inject = draw(st.one_of(st.none(), st.just(4) if length > 4 else st.none(), st.integers(0, length - 1)))
    return make_config(
        teams, length, inject,
        rounds=draw(st.integers(0, 2)),
        id_rag=draw(st.booleans()), tom=draw(st.booleans()), retrieval=draw(st.booleans()),
    )


def invariant_violations(cfg: RunConfig, transcript: list[Turn]) -> list[str]:
    """Every broken orchestration law, as human-readable strings (empty when all hold)."""
    bad: list[str] = []
    n_agents = len(cfg.roster)
    teams = cfg.ordered_teams()
    expected = cfg.deliberation_rounds * n_agents + 2 * n_agents + cfg.debate_length + len(cfg.perturbations)
    if cfg.monologue:
        expected = cfg.debate_length + len(cfg.perturbations)
    if len(transcript) != expected:
        bad.append(f"turn count {len(transcript)} != {expected}")

    # phase monotonicity, dense indices, non-decreasing logical clock
    for i, turn in enumerate(transcript):
        if turn.turn_index != i:
            bad.append(f"turn_index {turn.turn_index} at position {i}")
        if i and turn.phase.order < transcript[i - 1].phase.order:
            bad.append(f"phase went back at {i}")
        if i and turn.ts_ms < transcript[i - 1].ts_ms:
            bad.append(f"clock went back at {i}")

    # team alternation in the debate phase
    speakers = [t for t in transcript if t.phase is Phase.DEBATE and not t.is_moderator]
    for i, turn in enumerate(speakers):
        if turn.debate_turn_index != i + 1:
            bad.append(f"speaker {i} has debate_turn_index {turn.debate_turn_index}")
        if teams and turn.team_id != teams[i % len(teams)].team_id:
            bad.append(f"speaker {i} from {turn.team_id}, expected {teams[i % len(teams)].team_id}")
        if len(teams) > 1 and i and turn.team_id == speakers[i - 1].team_id:
            bad.append(f"team repeated at speaker {i}")

    # perturbation placement
    for slot, _ in cfg.perturbations:
        mods = [i for i, t in enumerate(transcript)
                if t.phase is Phase.DEBATE and t.speaker == MODERATOR and t.debate_turn_index == slot]
        if len(mods) != 1:
            bad.append(f"{len(mods)} injections for slot {slot}")
            continue
        before = transcript[mods[0] - 1] if mods[0] else None
        if slot == 0:
            if before is not None and before.phase is Phase.DEBATE:
                bad.append("slot 0 injection is not the first debate turn")
        elif before is None or before.is_moderator or before.debate_turn_index != slot:
            bad.append(f"injection {slot} does not follow speaker turn {slot}")
        after = [t for t in transcript[mods[0] + 1:] if t.phase is Phase.DEBATE and not t.is_moderator]
        if len(after) != cfg.debate_length - slot:
            bad.append(f"{len(after)} speaker turns after injection {slot}")
        window = observation_window(transcript, slot)
        if len(window) != min(6, cfg.debate_length - slot):
            bad.append(f"observation window of {len(window)} turns after slot {slot}")
    return bad
