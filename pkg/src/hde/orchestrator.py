"""The debate state machine: deliberation, interrogation, then the inter-team debate."""

from __future__ import annotations

import logging
from contextlib import contextmanager
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterator, Mapping

from hde.backend import (
    AuditLog,
    Backend,
    GenerationRequest,
    assemble_prompt,
    generate,
    make_backend,
)
from hde.config import RunConfig, TeamConfig, PerturbationSpec, validate
from hde.identity import (
    IdentityGraph,
    MemoryEntry,
    MemorySource,
    WorkingMemory,
    filter_and_merge,
    load_identity,
)
from hde.retrieval import RetrievalIndex, build_index, build_query, load_manifest
from hde.tom import WeaknessMap, load_weakness_map, select_hints
from hde.transcript import MODERATOR, Phase, Turn, write_transcript

log = logging.getLogger(__name__)

NEUTRAL_PERSONA = "You are a helpful assistant discussing an ethical dilemma."


class PhaseError(RuntimeError):
    pass


class DebateAborted(RuntimeError):
    def __init__(self, message: str, state: "DebateState"):
        super().__init__(message)
        self.state = state


@dataclass
class DebateState:
    teams: list[TeamConfig]
    dilemma: str
    perturbation_schedule: list[tuple[int, PerturbationSpec]] = field(default_factory=list)
    phase: Phase = Phase.DELIBERATION
    turn_index: int = 0
    debate_turn_index: int = 0
    transcript: list[Turn] = field(default_factory=list)
    shared_memory_log: dict[str, list[MemoryEntry]] = field(default_factory=dict)
    working_memory: dict[str, WorkingMemory] = field(default_factory=dict)
    clock_ms: int = 0

    def copy(self) -> "DebateState":
        return replace(
            self,
            transcript=list(self.transcript),
            shared_memory_log={k: list(v) for k, v in self.shared_memory_log.items()},
            working_memory=dict(self.working_memory),
        )

    def advance(self, phase: Phase) -> None:
        if phase.order != self.phase.order + 1:
            raise PhaseError(f"illegal transition {self.phase.value} -> {phase.value}")
        self.phase = phase


@dataclass
class DebateContext:
    """Everything a run needs besides its state: config, identities, index, backends."""

    config: RunConfig
    identities: dict[str, IdentityGraph]
    moderator: IdentityGraph
    index: RetrievalIndex | None
    scopes: dict[str, list[str]]
    weakness_maps: dict[str, WeaknessMap]
    backends: Mapping[str, Backend]
    audit: AuditLog = field(default_factory=AuditLog)

    def backend_for(self, speaker: str) -> Backend:
        if speaker in self.backends:
            return self.backends[speaker]
        return self.backends["default"]

    def school_of(self, agent_id: str) -> str:
        return self.identities[agent_id].school


def initial_state(cfg: RunConfig) -> DebateState:
    validate(cfg)
    return DebateState(
        teams=cfg.ordered_teams(),
        dilemma=cfg.dilemma,
        perturbation_schedule=sorted(cfg.perturbations, key=lambda p: p[0]),
        shared_memory_log={t.team_id: [] for t in cfg.teams},
        working_memory={a: WorkingMemory(capacity=cfg.wm_capacity) for a in cfg.roster},
    )


def build_context(
    cfg: RunConfig,
    backends: Mapping[str, Backend] | Backend | None = None,
    index: RetrievalIndex | None = None,
    audit: AuditLog | None = None,
) -> DebateContext:
    identities = {a: load_identity(b.identity) for a, b in cfg.agents.items()}
    moderator = (
        load_identity(cfg.moderator_identity)
        if cfg.moderator_identity
        else IdentityGraph("moderator", "NEUTRAL", "You are a neutral Socratic moderator.")
    )
    manifest = load_manifest(cfg.corpus_manifest) if cfg.corpus_manifest else None
    if cfg.retrieval_enabled and index is None:
        index, _ = build_index(manifest)
    scopes: dict[str, list[str]] = {}
    if manifest is not None:
        for agent_id, binding in cfg.agents.items():
            own = list(binding.corpora) if binding.corpora is not None else manifest.owned_by(agent_id)
            if cfg.share_team_corpora and cfg.team_of(agent_id):
                team = next(t for t in cfg.teams if agent_id in t.agent_ids)
                for mate in team.agent_ids:
                    b = cfg.agents[mate]
                    own += list(b.corpora) if b.corpora is not None else manifest.owned_by(mate)
            scopes[agent_id] = sorted(set(own))
        scopes["*"] = sorted(manifest.corpus_ids)
    maps = {}
    for agent_id, binding in cfg.agents.items():
        if binding.weakness_map:
            maps[agent_id] = load_weakness_map(binding.weakness_map, identities[agent_id].school)
    if backends is None:
        backends = {"default": make_backend(cfg.backend, cfg.base_dir)}
    elif not isinstance(backends, Mapping):
        backends = {"default": backends}
    return DebateContext(cfg, identities, moderator, index, scopes, maps, backends, audit or AuditLog())


# -- helpers --------------------------------------------------------------------


def _append_turn(state: DebateState, speaker: str, text: str, team_id: str | None, latency_ms: int = 0,
                 debate_turn: int | None = None) -> Turn:
    state.clock_ms += latency_ms
    turn = Turn(
        turn_index=state.turn_index,
        phase=state.phase,
        speaker=speaker,
        text=text.strip(),
        team_id=team_id,
        debate_turn_index=debate_turn,
        ts_ms=state.clock_ms,
    )
    state.transcript.append(turn)
    state.turn_index += 1
    return turn


def _call(ctx: DebateContext, state: DebateState, speaker: str, request: GenerationRequest):
    result = generate(ctx.backend_for(speaker), request)
    ctx.audit.generation(state.turn_index, speaker, request, result)
    return result


def _prompt_identity(ctx: DebateContext, agent_id: str) -> IdentityGraph:
    identity = ctx.identities[agent_id]
    if not ctx.config.persona_enabled:
        return IdentityGraph(agent_id, identity.school, NEUTRAL_PERSONA)
    if not ctx.config.id_rag_enabled:
        return identity.persona_only()
    return identity


def _instruction(ref: str, body: str) -> str:
    return f"turn-ref: {ref}\n{body}"


def speaker_order(teams: list[TeamConfig], length: int, solo: str | None = None) -> Iterator[tuple[str, str | None]]:
    """Round-robin across teams, and across agents within each team."""
    for i in range(length):
        if solo is not None:
            yield solo, None
            continue
        team = teams[i % len(teams)]
        yield team.agent_ids[(i // len(teams)) % len(team.agent_ids)], team.team_id


@contextmanager
def _aborting(state: DebateState, phase: str):
    try:
        yield
    except DebateAborted:
        raise
    except Exception as exc:
        raise DebateAborted(f"{phase} failed: {exc}", state) from exc


# -- phases ---------------------------------------------------------------------


def run_deliberation(state: DebateState, ctx: DebateContext) -> DebateState:
    """Each agent states a position, then synthesises with teammates via the shared log."""
    if state.phase is not Phase.DELIBERATION:
        raise PhaseError(f"deliberation requires DELIBERATION, got {state.phase.value}")
    state = state.copy()
    with _aborting(state, "deliberation"):
        _deliberate(state, ctx)
    state.advance(Phase.INTERROGATION)
    return state


def _deliberate(state: DebateState, ctx: DebateContext) -> None:
    cfg = ctx.config
    for team in state.teams:
        for rnd in range(cfg.deliberation_rounds):
            kind = "statement" if rnd == 0 else "synthesis"
            for agent_id in team.agent_ids:
                identity = ctx.identities[agent_id]
                ref = f"deliberation/{team.team_id}/r{rnd + 1}/{agent_id}"
                body = (
                    f"Internal deliberation with your team ({team.stance_label or team.team_id}) on: {state.dilemma}\n"
                    + ("State your opening position." if kind == "statement"
                       else "Read the team memory log and synthesise a common team position.")
                )
                request = assemble_prompt(
                    _prompt_identity(ctx, agent_id), state.working_memory[agent_id], [], state.dilemma,
                    [t for t in state.transcript if t.team_id == team.team_id], cfg.window,
                    instruction=_instruction(ref, body), temperature=cfg.temperature,
                    max_output_tokens=cfg.max_output_tokens,
                )
                result = _call(ctx, state, agent_id, request)
                turn = _append_turn(state, agent_id, result.text, team.team_id, result.latency_ms)
                note = MemoryEntry(MemorySource.TRANSCRIPT, f"{identity.display_name}: {turn.text}", f"turn:{turn.turn_index}")
                state.shared_memory_log[team.team_id].append(note)
                for mate in team.agent_ids:
                    state.working_memory[mate] = state.working_memory[mate].append([note])


def moderator_question_text(agent_name: str, question: str) -> str:
    return f"{agent_name}, {question.strip()}"


def run_interrogation(state: DebateState, ctx: DebateContext) -> DebateState:
    """One elenctic question from the moderator to each agent, and the agent's answer."""
    if state.phase is not Phase.INTERROGATION:
        raise PhaseError(f"interrogation requires INTERROGATION, got {state.phase.value}")
    state = state.copy()
    with _aborting(state, "interrogation"):
        _interrogate(state, ctx)
    state.advance(Phase.DEBATE)
    return state


def _interrogate(state: DebateState, ctx: DebateContext) -> None:
    cfg = ctx.config
    mod = ctx.moderator
    for team in state.teams:
        for agent_id in team.agent_ids:
            identity = ctx.identities[agent_id]
            own = [t for t in state.transcript if t.speaker == agent_id]
            position = own[-1].text if own else "(no statement yet)"
            request = assemble_prompt(
                mod, WorkingMemory(), [], state.dilemma, own, cfg.window,
                instruction=_instruction(
                    f"interrogation/question/{agent_id}",
                    f"Pose one ontology-level, elenctic question to {identity.display_name} exposing a gap "
                    f"in this position: {position}",
                ),
                temperature=cfg.temperature, max_output_tokens=cfg.max_output_tokens,
            )
            result = _call(ctx, state, MODERATOR, request)
            question = _append_turn(
                state, MODERATOR, moderator_question_text(identity.display_name, result.text), None, result.latency_ms
            )
            state.working_memory[agent_id] = state.working_memory[agent_id].append(
                [MemoryEntry(MemorySource.MODERATOR, question.text, f"turn:{question.turn_index}")]
            )
            request = assemble_prompt(
                _prompt_identity(ctx, agent_id), state.working_memory[agent_id], [], state.dilemma,
                state.transcript, cfg.window,
                instruction=_instruction(f"interrogation/answer/{agent_id}", f"Answer the moderator: {question.text}"),
                temperature=cfg.temperature, max_output_tokens=cfg.max_output_tokens,
            )
            result = _call(ctx, state, agent_id, request)
            _append_turn(state, agent_id, result.text, team.team_id, result.latency_ms)


def _inject(state: DebateState, ctx: DebateContext, after: int) -> None:
    for slot, spec in state.perturbation_schedule:
        if slot == after:
            _append_turn(state, MODERATOR, spec.text, None, 0, debate_turn=slot)
            ctx.audit.stage(state.turn_index - 1, MODERATOR, "perturbation", perturbation=spec.id.value, debate_turn=slot)


def _speaker_turn(state: DebateState, ctx: DebateContext, agent_id: str, team_id: str | None, n: int) -> None:
    cfg = ctx.config
    identity = ctx.identities[agent_id]
    debate_turns = [t for t in state.transcript if t.phase is Phase.DEBATE and not t.is_moderator]
    opponent = next((t for t in reversed(debate_turns) if t.team_id != team_id), None) if team_id else None
    wm = state.working_memory[agent_id]
    idx = state.turn_index
    if cfg.retrieval_enabled and ctx.index is not None:
        scope = ctx.scopes.get(agent_id) if cfg.id_rag_enabled else ctx.scopes["*"]
        if not scope:
            scope = ctx.scopes["*"]
        query = build_query(state.dilemma, opponent.text if opponent else None)
        hits = ctx.index.retrieve(query, cfg.k, scope) if query else []
        ctx.audit.stage(idx, agent_id, "retrieve", scope=list(scope), chunks=[c.chunk_id for c, _ in hits])
        facts = [MemoryEntry(MemorySource.RETRIEVED_FACT, c.text, c.chunk_id) for c, _ in hits]
        if cfg.id_rag_enabled:
            merged = filter_and_merge(wm, facts, identity.constraints)
            kept = {e.origin_ref for e in merged.entries[len(wm.entries):]} if len(merged) > len(wm) else set()
            ctx.audit.stage(idx, agent_id, "filter_and_merge",
                            deleted=[f.origin_ref for f in facts if f.origin_ref not in kept])
            wm = merged
        else:
            wm = wm.append(facts)
        state.working_memory[agent_id] = wm
    hints = []
    if cfg.tom_enabled and opponent is not None and agent_id in ctx.weakness_maps:
        hints = select_hints(ctx.weakness_maps[agent_id], opponent.text, ctx.school_of(opponent.speaker), cfg.max_hints)
        ctx.audit.stage(idx, agent_id, "select_hints", hints=[h.counter_hint for h in hints],
                        opponent=opponent.speaker)
    request = assemble_prompt(
        _prompt_identity(ctx, agent_id), wm, hints, state.dilemma, state.transcript, cfg.window,
        instruction=_instruction(
            f"debate/{n:02d}/{agent_id}",
            f"Inter-team debate, turn {n} of {cfg.debate_length}. Respond to the latest arguments on: {state.dilemma}",
        ),
        temperature=cfg.temperature, max_output_tokens=cfg.max_output_tokens,
    )
    ctx.audit.stage(idx, agent_id, "assemble_prompt")
    result = _call(ctx, state, agent_id, request)
    ctx.audit.stage(idx, agent_id, "generate", backend=result.backend_id)
    _append_turn(state, agent_id, result.text, team_id, result.latency_ms, debate_turn=n)
    state.debate_turn_index = n


def run_debate(state: DebateState, ctx: DebateContext) -> DebateState:
    """Phase 3: ``debate_length`` speaker turns with scheduled moderator injections.

    A perturbation scheduled at debate turn t is injected right after speaker
    turn t, so it never occupies a speaker slot.
    """
    if state.phase is not Phase.DEBATE:
        raise PhaseError(f"debate requires DEBATE, got {state.phase.value}")
    state = state.copy()
    cfg = ctx.config
    solo = cfg.roster[0] if cfg.monologue else None
    with _aborting(state, "debate"):
        _inject(state, ctx, 0)
        for n, (agent_id, team_id) in enumerate(speaker_order(state.teams, cfg.debate_length, solo), start=1):
            _speaker_turn(state, ctx, agent_id, team_id, n)
            _inject(state, ctx, n)
    state.advance(Phase.DONE)
    return state


def run_phases(state: DebateState, ctx: DebateContext) -> DebateState:
    state = run_deliberation(state, ctx)
    state = run_interrogation(state, ctx)
    return run_debate(state, ctx)


def run_full_pipeline(
    cfg: RunConfig,
    out_dir: str | Path | None = None,
    backends: Mapping[str, Backend] | Backend | None = None,
    index: RetrievalIndex | None = None,
) -> tuple[DebateState, Path | None, DebateContext]:
    """Run all three phases; persist transcript.jsonl and audit.jsonl if ``out_dir`` is given.

    On failure the partial transcript is still written and :class:`DebateAborted`
    carries the partial state.
    """
    ctx = build_context(cfg, backends, index)
    state = initial_state(cfg)
    out = Path(out_dir) if out_dir is not None else None
    transcript_path = out / "transcript.jsonl" if out else None
    current = state
    try:
        for phase_fn in (run_deliberation, run_interrogation, run_debate):
            current = phase_fn(current, ctx)
    except DebateAborted as exc:
        if out:
            write_transcript(transcript_path, exc.state.transcript)
            ctx.audit.write(out / "audit.jsonl")
        raise
    if out:
        write_transcript(transcript_path, current.transcript)
        ctx.audit.write(out / "audit.jsonl")
    return current, transcript_path, ctx
