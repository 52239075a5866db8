"""Acceptance criteria, one test each.

Every test records a single PASS/FAIL line; the lines are printed together in
the terminal summary (see conftest.py) and also inline when run with ``-s``.
"""

from __future__ import annotations

import ast
import random
import subprocess
import sys
import time
from pathlib import Path

import hde.tom
from hde.cli import main
from hde.config import data_root
from hde.harness import ablation_rows, execute_plan, load_plan, resilience_rows
from hde.identity import MatchMode, MemoryEntry, MemorySource, NegativeConstraint, WorkingMemory, filter_and_merge
from hde.metrics import Condition, acs_aggregate, ar_co, cohens_d, read_acs_csv, round2, sys_ar
from hde.orchestrator import run_full_pipeline
from hde.retrieval import Chunk, RetrievalIndex
from hde.transcript import MODERATOR, Phase, Turn
from helpers import PHILOSOPHERS, catch_all, invariant_violations, make_config
from oracles import bm25_ranking, brute_filter

RESULTS: dict[int, str] = {}


def record(n: int, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {n:>2}: {detail}"
    RESULTS[n] = line
    print(line)
    assert ok, line


# 1 --------------------------------------------------------------------------------------


def test_c01_filter_oracle_equivalence():
    rng = random.Random(20240601)
    alphabet = [f"p{i}" for i in range(16)] + ["p1 p2", "p3 p4", "p5 p6 p7", "p8 p9"]
    mismatches = 0
    start = time.perf_counter()
    for _ in range(1000):
        capacity = rng.randint(1, 12)
        wm_texts = [" ".join(rng.choices(alphabet, k=rng.randint(1, 4))) for _ in range(rng.randint(0, 8))]
        retrieved = [" ".join(rng.choices(alphabet, k=rng.randint(1, 4))) for _ in range(rng.randint(0, 8))]
        cons = [(rng.sample(alphabet, rng.randint(1, 3)), rng.choice(["ANY_PHRASE", "ALL_PHRASES"]))
                for _ in range(rng.randint(0, 4))]
        wm = WorkingMemory(tuple(MemoryEntry(MemorySource.TRANSCRIPT, t) for t in wm_texts), capacity)
        got = filter_and_merge(
            wm,
            [MemoryEntry(MemorySource.RETRIEVED_FACT, t) for t in retrieved],
            [NegativeConstraint(f"c{i}", "l", tuple(p), MatchMode(m)) for i, (p, m) in enumerate(cons)],
        )
        if [e.text for e in got.entries] != brute_filter(wm_texts[-capacity:], retrieved, cons, capacity):
            mismatches += 1
    elapsed = time.perf_counter() - start
    record(1, mismatches == 0 and elapsed < 5.0,
           f"filter vs brute force on 1000 instances: {mismatches} mismatches in {elapsed:.2f}s")


# 2 --------------------------------------------------------------------------------------

RESILIENCE_TABLE = [
    ["System", "Pert.", "SysAR", "ArCo"],
    ["Hetero", "P1", "0.50", "1.00"],
    ["Hetero", "P2", "0.00", "1.00"],
    ["Hetero", "P3", "0.00", "1.00"],
    ["Homo", "P1", "0.00", "0.00"],
    ["Homo", "P2", "0.00", "0.00"],
    ["Homo", "P3", "0.00", "0.17"],
    ["Mean (Het)", "", "0.17", "1.00"],
    ["Mean (Hom)", "", "0.00", "0.06"],
]


def test_c02_resilience_table(tmp_path, lexicon):
    _, docs = execute_plan(load_plan(data_root() / "plans" / "factorial.yaml"), lexicon, tmp_path)
    rows = resilience_rows(docs)
    diff = [(want, got) for want, got in zip(RESILIENCE_TABLE, rows) if want != got]
    record(2, rows == RESILIENCE_TABLE, "resilience table from golden transcripts "
           + ("matches exactly" if rows == RESILIENCE_TABLE else f"differs: {diff}"))


# 3 --------------------------------------------------------------------------------------

ABLATION_TABLE = [
    ["Condition", "DA", "CR", "ArCo"],
    ["Vanilla RAG Only", "0.51", "0.05", "1.00"],
    ["Vanilla + ID-RAG", "0.90", "0.25", "1.00"],
    ["Vanilla + ToM", "0.79", "0.40", "1.00"],
    ["Full System", "1.00", "0.45", "1.00"],
    ["Δ (ID-RAG)", "+39 pp", "+20 pp", "---"],
    ["Δ (ToM)", "+28 pp", "+35 pp", "---"],
]


def test_c03_ablation_table(tmp_path, lexicon):
    _, docs = execute_plan(load_plan(data_root() / "plans" / "ablation.yaml"), lexicon, tmp_path)
    rows = ablation_rows(docs)
    diff = [(want, got) for want, got in zip(ABLATION_TABLE, rows) if want != got]
    record(3, rows == ABLATION_TABLE, "ablation table from scripted fixtures "
           + ("matches exactly" if rows == ABLATION_TABLE else f"differs: {diff}"))


# 4 --------------------------------------------------------------------------------------


def _random_config(rng: random.Random):
    pool = list(PHILOSOPHERS)
    rng.shuffle(pool)
    teams = [[pool.pop() for _ in range(rng.randint(1, 2))] for _ in range(rng.randint(1, 3))]
    length = rng.randint(1, 20)
    if length >= 10 and rng.random() < 0.7:
        inject = 4
    else:
        inject = rng.choice([None, rng.randrange(length)])
    return make_config(teams, length, inject, rounds=rng.randint(0, 2), id_rag=rng.random() < 0.5,
                       tom=rng.random() < 0.5, retrieval=rng.random() < 0.5)


def test_c04_orchestration_invariants():
    rng = random.Random(7)
    violations: list[str] = []
    turn4_runs = 0
    for i in range(200):
        cfg = _random_config(rng)
        state, _, _ = run_full_pipeline(cfg, None, backends=catch_all(400))
        violations += [f"config {i}: {v}" for v in invariant_violations(cfg, state.transcript)]
        if cfg.injection_turn == 4 and cfg.debate_length >= 10:
            turn4_runs += 1
    record(4, not violations and turn4_runs > 0,
           f"200 random configs ({turn4_runs} with a turn-4 injection): {len(violations)} violations"
           + (f", first: {violations[0]}" if violations else ""))


# 5 --------------------------------------------------------------------------------------


def test_c05_graceful_vs_catastrophic(tmp_path, lexicon):
    _, docs = execute_plan(load_plan(data_root() / "plans" / "failure_modes.yaml"), lexicon, tmp_path)
    got = {d["run"]["run_id"]: (d["raw"]["sys_ar"], d["raw"]["ar_co"]) for d in docs}
    ok = got == {"graceful": (0.0, 1.0), "catastrophic": (0.0, 0.0)}
    record(5, ok, f"graceful {got.get('graceful')}, catastrophic {got.get('catastrophic')}")


# 6 --------------------------------------------------------------------------------------

SNIPPETS = [
    "the runaway trolley, the lever and the side track",
    "justice, conscience and moral obligation",
    "the weather is pleasant today",
    "five people on the track",
    "duty and the maxim of the will",
    "a lever and a switch",
    "moral harm",
]


def test_c06_recovery_implies_coherence(lexicon, tmp_path):
    rng = random.Random(99)
    counterexamples = 0
    checked = 0
    for _ in range(3000):
        length = rng.randint(5, 14)
        inject = rng.randint(0, length - 1)
        turns: list[Turn] = []
        for n in range(1, length + 1):
            text = " ".join(rng.choices(SNIPPETS, k=rng.randint(1, 2)))
            turns.append(Turn(len(turns), Phase.DEBATE, "a" if n % 2 else "b", text, "t1" if n % 2 else "t2", n))
            if n == inject:
                turns.append(Turn(len(turns), Phase.DEBATE, MODERATOR, "What now?", None, n))
        if inject == 0:
            turns.insert(0, Turn(0, Phase.DEBATE, MODERATOR, "What now?", None, 0))
        checked += 1
        if sys_ar(turns, lexicon.base, inject)[0] > 0 and ar_co(turns, lexicon.valid, inject) < 1 / 6:
            counterexamples += 1
    _, docs = execute_plan(load_plan(data_root() / "plans" / "factorial.yaml"), lexicon, tmp_path)
    for d in docs:
        checked += 1
        if d["raw"]["sys_ar"] > 0 and d["raw"]["ar_co"] < 1 / 6:
            counterexamples += 1
    record(6, counterexamples == 0, f"SysAR > 0 implies ArCo >= 1/6 on {checked} transcripts: "
           f"{counterexamples} counterexamples")


# 7 --------------------------------------------------------------------------------------


def test_c07_replay_determinism(tmp_path):
    config = str(data_root() / "configs" / "hetero_p1.yaml")
    codes = [main(["debate", "--config", config, "--out", str(tmp_path / run)]) for run in ("a", "b")]
    same = {
        name: (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
        for name in ("transcript.jsonl", "metrics.json", "audit.jsonl")
    }
    record(7, codes == [0, 0] and all(same.values()),
           f"two scripted debate runs, exit codes {codes}, byte-identical files: {same}")


# 8 --------------------------------------------------------------------------------------

TOY = {
    "doc1": "duty binds the rational will through the moral law",
    "doc2": "the greatest happiness of the greatest number is the measure of right",
    "doc3": "virtue is a mean and happiness is activity of the soul",
    "doc4": "happiness and duty and law",
    "doc5": "happiness and duty and law",
}


def test_c08_bm25_correctness():
    index = RetrievalIndex(Chunk(f"{cid}:0000", cid, text, 0) for cid, text in TOY.items())
    queries = ["happiness", "duty law", "greatest happiness virtue", "soul mean", "law and happiness of duty"]
    bad = []
    for q in queries:
        got = [c.corpus_id for c, _ in index.retrieve(q, 5, TOY)]
        want = bm25_ranking(TOY, q, 5)
        if got != want:
            bad.append((q, got, want))
    record(8, not bad, f"BM25 ranking on a 5-document corpus for {len(queries)} queries (with a tie): "
           + ("identical to brute force" if not bad else f"mismatch {bad[0]}"))


# 9 --------------------------------------------------------------------------------------


def test_c09_acs_aggregation():
    summary = acs_aggregate(read_acs_csv(data_root() / "acs" / "scores.csv"))
    got = {c.value: (round2(s.delta_acs), round2(s.quiz), round2(s.stance_shift), s.n) for c, s in summary.items()}
    want = {
        "B_CHAT": (0.20, 0.40, 0.00, 5),
        "B_SINGLE_RAG": (0.40, 0.60, 0.80, 5),
        "HOMO": (-0.29, 1.00, 0.29, 7),
        "HETERO": (2.20, 2.20, 0.40, 5),
    }
    # two groups: means 5 and 2, sums of squares 10 and 2, df 5 + 5 - 2 = 8, pooled SD sqrt(12 / 8)
    synthetic = cohens_d([3, 4, 5, 6, 7], [1, 2, 3, 2, 2])
    hand = (5 - 2) / (12 / 8) ** 0.5
    d_ok = synthetic is not None and abs(synthetic - hand) <= 1e-9
    record(9, got == want and d_ok, f"table aggregates {'match' if got == want else got}; "
           f"Cohen's d {synthetic:.12f} vs hand {hand:.12f}")
    assert summary[Condition.HETERO].cohens_d is not None


# 10 -------------------------------------------------------------------------------------


def test_c10_tom_isolated_from_identity():
    tree = ast.parse(Path(hde.tom.__file__).read_text(encoding="utf-8"))
    modules = set()
    for node in ast.walk(tree):
        if isinstance(node, ast.Import):
            modules |= {a.name for a in node.names}
        elif isinstance(node, ast.ImportFrom):
            modules.add(node.module or "")
    static_ok = not any(m.startswith("hde") for m in modules)
    probe = subprocess.run(
        [sys.executable, "-c", "import sys, hde.tom; print('hde.identity' in sys.modules)"],
        capture_output=True, text=True, check=True,
    )
    runtime_ok = probe.stdout.strip() == "False"
    record(10, static_ok and runtime_ok,
           f"tom imports {sorted(modules)}; identity loaded at runtime: {probe.stdout.strip()}")

