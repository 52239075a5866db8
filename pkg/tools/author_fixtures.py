"""Regenerate the golden scripted fixtures under src/hde/data.

Every debate turn is assembled from short fragments whose keyword hits are
known, then the finished transcripts are scored with the real metric code and
checked against the target table values before anything is written.

    python3 tools/author_fixtures.py
"""

from __future__ import annotations

import csv
import itertools
from pathlib import Path

import yaml

from hde.backend import dump_script
from hde.config import data_root
from hde.harness import ablation_rows, execute_plan, load_plan, resilience_rows
from hde.metrics import ACS_FIELDS, acs_aggregate, count_hits, load_lexicon, read_acs_csv, round2

DATA = Path(__file__).resolve().parents[1] / "src" / "hde" / "data"
LEX = load_lexicon(DATA / "keywords")

# -- fragments -------------------------------------------------------------------

RECOVER = "Let us return to the runaway trolley, the lever and the side track."
COHERENT = "What justice and conscience demand here is a moral obligation we cannot set aside."
ADRIFT = [
    "I am not sure the question has a clean answer at all.",
    "Perhaps we should talk about something else, such as how railways were built.",
    "That reminds me of a story about a ferry crossing in the fog.",
    "It all depends on how we frame things, and framing is a matter of taste.",
    "We keep circling; maybe the point is simply that people disagree.",
    "I would rather hear what the audience thinks before going further.",
]

VOICE = {
    "kant": "Reason must give itself the principle it acts upon.",
    "aquinas": "We should reason from first principles grasped by the intellect.",
    "mill": "We should look at what actually follows for everyone affected.",
    "bentham": "Let us count what each option brings about, case by case.",
    "aristotle": "The answer lies in the character of the person who acts.",
    "plato": "We must look past appearances toward what is truly so.",
    "augustine": "The restless heart finds its measure only in its proper object.",
}

OWN = {
    "DEONTOLOGY": "I act only on a maxim I could will as universal law.",
    "NATURAL_LAW": "Right reason discerns the natural law written into human nature.",
    "UTILITARIANISM": "The greatest happiness principle asks us to weigh pleasure against pain.",
    "VIRTUE_ANCIENT": "Practical wisdom seeks the golden mean that serves flourishing.",
    "VIRTUE_CHRISTIAN": "Ordered love and humility before the will of god guide us.",
}

AIMED = {
    "DEONTOLOGY": "Their talk of duty alone cannot settle this.",
    "NATURAL_LAW": "Their appeal to double effect cannot settle this.",
    "UTILITARIANISM": "Their appeal to utility cannot settle this.",
}

SCHOOL = {
    "kant": "DEONTOLOGY", "aquinas": "NATURAL_LAW", "mill": "UTILITARIANISM", "bentham": "UTILITARIANISM",
    "aristotle": "VIRTUE_ANCIENT", "plato": "VIRTUE_ANCIENT", "augustine": "VIRTUE_CHRISTIAN",
}

TEAMS = {
    "HETERO_RESILIENCE": [("virtue_natural_law", ["aristotle", "aquinas"]), ("utilitarian", ["mill", "bentham"])],
    "HETERO_PEDAGOGY": [("deontology_natural_law", ["kant", "aquinas"]), ("utilitarian", ["mill", "bentham"])],
    "HOMO": [("ancient_virtue", ["aristotle", "plato"]), ("christian_virtue", ["aquinas", "augustine"])],
}


def _check_fragments() -> None:
    neutral = list(VOICE.values()) + ADRIFT
    for text in neutral:
        assert count_hits(text, LEX.valid) == 0, text
    assert count_hits(RECOVER, LEX.base) >= 3
    assert count_hits(COHERENT, LEX.valid) >= 3 and count_hits(COHERENT, LEX.base) == 0
    for school, text in OWN.items():
        assert count_hits(text, LEX.framework(school)) >= 2, text
        assert count_hits(text, LEX.base) == 0
        others = [s for s in LEX.frameworks if s != school]
        assert all(count_hits(text, LEX.framework(o)) == 0 for o in others), text
    for school, text in AIMED.items():
        hits = {s: count_hits(text, LEX.framework(s)) for s in LEX.frameworks}
        assert hits[school] == 1 and sum(hits.values()) == 1, text


# -- script skeleton ----------------------------------------------------------------


def speaker_order(preset: str, length: int) -> list[str]:
    teams = [members for _, members in TEAMS[preset]]
    return [teams[i % 2][(i // 2) % 2] for i in range(length)]


def opening_turns(preset: str) -> list[tuple[str, str]]:
    """Deliberation and interrogation responses; they never enter the metrics."""
    pairs = []
    for team, members in TEAMS[preset]:
        for rnd in (1, 2):
            for agent in members:
                verb = "opening position" if rnd == 1 else "refined team line"
                pairs.append((f"deliberation/{team}/r{rnd}/{agent}",
                              f"{VOICE[agent]} This is my {verb} on the trolley case. {OWN[SCHOOL[agent]]}"))
    for _, members in TEAMS[preset]:
        for agent in members:
            pairs.append((f"interrogation/question/{agent}",
                          "What principle would you refuse to give up, even if the outcome looked worse?"))
            pairs.append((f"interrogation/answer/{agent}", f"{VOICE[agent]} {OWN[SCHOOL[agent]]}"))
    return pairs


def script_for(preset: str, debate_texts: list[str]) -> list[tuple[str, str]]:
    order = speaker_order(preset, len(debate_texts))
    pairs = opening_turns(preset)
    pairs += [(f"debate/{n:02d}/{agent}", text) for n, (agent, text) in enumerate(zip(order, debate_texts), start=1)]
    return pairs


# -- resilience fixtures ---------------------------------------------------------------


def resilience_texts(preset: str, pattern: str, length: int = 10, inject: int = 4) -> list[str]:
    """``pattern`` describes the six observed turns: R recovered, C coherent only, D adrift."""
    order = speaker_order(preset, length)
    texts = []
    for n, agent in enumerate(order, start=1):
        if n <= inject:
            kind = "R"
        else:
            kind = pattern[n - inject - 1]
        if kind == "R":
            texts.append(f"{VOICE[agent]} {RECOVER} {COHERENT} {OWN[SCHOOL[agent]]}")
        elif kind == "C":
            texts.append(f"{VOICE[agent]} {COHERENT} {OWN[SCHOOL[agent]]}")
        else:
            texts.append(ADRIFT[(n - 1) % len(ADRIFT)])
    return texts


RESILIENCE = {
    # run_id: (preset, perturbation, pattern over the 6 observed turns)
    "hetero_p1": ("HETERO_RESILIENCE", "P1", "CRCCCC"),
    "hetero_p2": ("HETERO_RESILIENCE", "P2", "CCCCCC"),
    "hetero_p3": ("HETERO_RESILIENCE", "P3", "CCCCCC"),
    "homo_p1": ("HOMO", "P1", "DDDDDD"),
    "homo_p2": ("HOMO", "P2", "DDDDDD"),
    "homo_p3": ("HOMO", "P3", "DDDCDD"),
}

FAILURE_MODES = {
    "graceful": ("HETERO_RESILIENCE", "P2", "CCCCCC"),
    "catastrophic": ("HETERO_RESILIENCE", "P2", "DDDDDD"),
}


# -- ablation fixtures -----------------------------------------------------------------

ABLATION_LENGTH = 18
ABLATION_TARGETS = {
    # (id_rag, tom): (DA, CR)
    (False, False): (0.51, 0.05),
    (True, False): (0.90, 0.25),
    (False, True): (0.79, 0.40),
    (True, True): (1.00, 0.45),
}
ABLATION_PERTURBATIONS = ("P1", "P3")


def _turn_counts(length: int) -> dict[str, int]:
    counts: dict[str, int] = {}
    for agent in speaker_order("HETERO_PEDAGOGY", length):
        counts[agent] = counts.get(agent, 0) + 1
    return counts


def _split(total: int, caps: list[int]) -> list[int]:
    """Spread ``total`` over slots as evenly as the caps allow."""
    out = [0] * len(caps)
    for _ in range(total):
        i = min((j for j in range(len(caps)) if out[j] < caps[j]), key=lambda j: (out[j] / caps[j], j))
        out[i] += 1
    return out


def solve_counts(target: float, counts: dict[str, int], runs: int = 2) -> list[dict[str, int]]:
    """Per-run, per-agent numbers of qualifying turns whose mean fraction rounds to ``target``."""
    agents = list(counts)
    sizes = sorted(set(counts.values()))
    groups = {s: [a for a in agents if counts[a] == s] for s in sizes}
    caps = {s: s * len(groups[s]) * runs for s in sizes}
    denom = len(agents) * runs
    best = None
    for totals in itertools.product(*(range(caps[s] + 1) for s in sizes)):
        value = sum(t / s for t, s in zip(totals, sizes)) / denom
        if round2(value) == target:
            spread = max(abs(t / caps[s] - target) for t, s in zip(totals, sizes))
            if best is None or spread < best[0]:
                best = (spread, totals)
    if best is None:
        raise SystemExit(f"no turn allocation reaches {target}")
    per_run = [dict.fromkeys(agents, 0) for _ in range(runs)]
    for total, s in zip(best[1], sizes):
        slots = [(r, a) for r in range(runs) for a in groups[s]]
        for (r, a), v in zip(slots, _split(total, [s] * len(slots))):
            per_run[r][a] = v
    return per_run


def ablation_texts(da: dict[str, int], cr: dict[str, int], length: int = ABLATION_LENGTH) -> list[str]:
    order = speaker_order("HETERO_PEDAGOGY", length)
    seen: dict[str, int] = {}
    texts = []
    for agent in order:
        k = seen.get(agent, 0)
        seen[agent] = k + 1
        n_turns = order.count(agent)
        parts = [VOICE[agent], RECOVER if k == 0 else "", COHERENT]
        if k < da[agent]:
            parts.append(OWN[SCHOOL[agent]])
        if k >= n_turns - cr[agent]:
            target = "UTILITARIANISM" if SCHOOL[agent] != "UTILITARIANISM" else ("DEONTOLOGY" if k % 2 else "NATURAL_LAW")
            parts.append(AIMED[target])
        texts.append(" ".join(p for p in parts if p))
    return texts


# -- writing -----------------------------------------------------------------------------


def write_plan(path: Path, name: str, kind: str, runs: list[dict]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(yaml.safe_dump({"name": name, "kind": kind, "runs": runs}, sort_keys=False), encoding="utf-8")


def author_resilience() -> None:
    runs = []
    for run_id, (preset, pert, pattern) in RESILIENCE.items():
        dump_script(script_for(preset, resilience_texts(preset, pattern)), DATA / "scripts" / "factorial" / f"{run_id}.yaml")
        runs.append({"run_id": run_id, "preset": preset, "perturbation": pert,
                     "script": f"../scripts/factorial/{run_id}.yaml"})
    write_plan(DATA / "plans" / "factorial.yaml", "factorial", "factorial", runs)
    runs = []
    for run_id, (preset, pert, pattern) in FAILURE_MODES.items():
        dump_script(script_for(preset, resilience_texts(preset, pattern)), DATA / "scripts" / "failure" / f"{run_id}.yaml")
        runs.append({"run_id": run_id, "system": run_id.capitalize(), "preset": preset, "perturbation": pert,
                     "script": f"../scripts/failure/{run_id}.yaml"})
    write_plan(DATA / "plans" / "failure_modes.yaml", "failure_modes", "factorial", runs)


def author_ablation() -> None:
    counts = _turn_counts(ABLATION_LENGTH)
    runs = []
    for (id_rag, tom), (da_t, cr_t) in ABLATION_TARGETS.items():
        da_runs, cr_runs = solve_counts(da_t, counts), solve_counts(cr_t, counts)
        tag = {(False, False): "vanilla", (True, False): "idrag", (False, True): "tom", (True, True): "full"}[(id_rag, tom)]
        for i, pert in enumerate(ABLATION_PERTURBATIONS):
            run_id = f"{tag}_{pert.lower()}"
            texts = ablation_texts(da_runs[i], cr_runs[i])
            dump_script(script_for("HETERO_PEDAGOGY", texts), DATA / "scripts" / "ablation" / f"{run_id}.yaml")
            runs.append({"run_id": run_id, "preset": "HETERO_PEDAGOGY", "perturbation": pert,
                         "id_rag_enabled": id_rag, "tom_enabled": tom, "debate_length": ABLATION_LENGTH,
                         "script": f"../scripts/ablation/{run_id}.yaml"})
    write_plan(DATA / "plans" / "ablation.yaml", "ablation", "ablation", runs)


def author_example_config() -> None:
    cfg = {
        "name": "hetero_p1",
        "teams": [
            {"team_id": "virtue_natural_law", "agents": ["aristotle", "aquinas"], "stance_label": "Virtue/Natural Law"},
            {"team_id": "utilitarian", "agents": ["mill", "bentham"], "stance_label": "Utilitarian Consequentialism"},
        ],
        "agents": {a: {"identity": f"../identities/{a}.yaml", "weakness_map": f"../weakness_maps/{a}.yaml"}
                   for a in ("aristotle", "aquinas", "mill", "bentham")},
        "corpus_manifest": "../corpora/manifest.yaml",
        "moderator": "../identities/moderator.yaml",
        "backend": {"kind": "scripted", "script_path": "../scripts/factorial/hetero_p1.yaml"},
        "debate_length": 10,
        "perturbations": [{"debate_turn": 4, "id": "P1_PUSH_VS_LEVER"}],
        "modules": {"id_rag_enabled": True, "tom_enabled": True},
    }
    path = DATA / "configs" / "hetero_p1.yaml"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(yaml.safe_dump(cfg, sort_keys=False), encoding="utf-8")


# Learning-outcome aggregates per condition: per-learner gains, quiz scores, stance shifts
ACS_PLAN = {
    "B_CHAT": ([1, 0, 0, 0, 0], [1, 1, 0, 0, 0], [0, 0, 0, 0, 0]),
    "B_SINGLE_RAG": ([1, 1, 0, 0, 0], [1, 1, 1, 0, 0], [1, 1, 1, 1, 0]),
    "HOMO": ([0, 0, -1, 0, -1, 0, 0], [1, 1, 1, 1, 1, 1, 1], [1, 1, 0, 0, 0, 0, 0]),
    "HETERO": ([2, 2, 2, 2, 3], [3, 2, 2, 2, 2], [1, 1, 0, 0, 0]),
}
PRE = [(1, 1, 0), (0, 1, 1), (1, 0, 1), (1, 1, 1), (0, 1, 0), (1, 0, 0), (1, 1, 1)]


def _post(pre: tuple[int, int, int], gain: int) -> tuple[int, int, int]:
    post = list(pre)
    step = 1 if gain > 0 else -1
    for _ in range(abs(gain)):
        i = next(j for j in range(3) if 0 <= post[j] + step <= 2 and (step > 0 or post[j] > 0))
        post[i] += step
    return tuple(post)


def author_acs() -> None:
    path = DATA / "acs" / "scores.csv"
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ACS_FIELDS)
        pid = 0
        for cond, (gains, quiz, shift) in ACS_PLAN.items():
            for i, (g, q, s) in enumerate(zip(gains, quiz, shift)):
                pid += 1
                pre = PRE[i % len(PRE)]
                w.writerow([f"p{pid:02d}", cond, *pre, *_post(pre, g), q, s])


def verify(tmp: Path) -> None:
    for plan_name in ("factorial", "ablation", "failure_modes"):
        plan = load_plan(data_root() / "plans" / f"{plan_name}.yaml")
        _, docs = execute_plan(plan, LEX, tmp)
        rows = ablation_rows(docs) if plan.kind == "ablation" else resilience_rows(docs)
        print(f"== {plan_name}")
        for row in rows:
            print("   " + " | ".join(row))
    for cond, s in acs_aggregate(read_acs_csv(DATA / "acs" / "scores.csv")).items():
        print(f"   {cond.value}: n={s.n} gain={s.delta_acs:+.2f} quiz={s.quiz:.2f} shift={s.stance_shift:.2f} d={s.cohens_d}")


def main() -> None:
    import tempfile

    _check_fragments()
    author_resilience()
    author_ablation()
    author_example_config()
    author_acs()
    with tempfile.TemporaryDirectory() as tmp:
        verify(Path(tmp))


if __name__ == "__main__":
    main()
