"""The eight acceptance criteria, each at its stated tolerance.

Every test records a PASS/FAIL line; conftest.py prints them together at the
end of the run (and each test also prints its own line under ``-s``).
"""

import random
import time
from contextlib import contextmanager
from pathlib import Path

import numpy as np
import pytest

from oracles import (
    allowed_grid,
    brute_force_counts,
    field_classes,
    membership_grid,
    random_policy,
    request_fields,
    strings_upto,
)
from policysynth.analyzer import Relation, compare, denote, relation_from
from policysynth.automata import Alphabet, all_strings, compile_glob, count_upto, kernels
from policysynth.fgdsl import compile_fgspec
from policysynth.harness import emit_report, run_rq1, run_rq2, run_rq3
from policysynth.policy import Decision, Request, evaluate, glob_match
from policysynth.specgen import RequestSpec, generate_request_spec, load_corpus
from policysynth.synth import DenyDroppingBackend, OracleBackend, PromptKind, ReplayBackend, build_prompt

HERE = Path(__file__).parent
GOLDEN = HERE / "golden"
REPLAY = HERE / "fixtures" / "replay"

RESULTS: dict[int, str] = {}

TITLES = {
    1: "denotation agrees with evaluation",
    2: "comparison matches brute force",
    3: "model counting",
    4: "fine-grained oracle loop",
    5: "rq1 controls and replay goldens",
    6: "spec generation bounds",
    7: "prompt fidelity",
    8: "performance envelope",
}


@contextmanager
def criterion(n):
    start = time.perf_counter()
    detail = {}
    try:
        yield detail
    except BaseException as exc:
        line = f"criterion {n} ({TITLES[n]}): FAIL after {time.perf_counter() - start:.1f}s: {type(exc).__name__}: {str(exc)[:160]}"
        RESULTS[n] = line
        print("\n" + line)
        raise
    line = f"criterion {n} ({TITLES[n]}): PASS in {time.perf_counter() - start:.1f}s; {detail.get('msg', '')}".rstrip("; ")
    RESULTS[n] = line
    print("\n" + line)


@pytest.fixture(scope="module")
def corpus():
    return load_corpus()


def test_criterion_1_denotation_agreement():
    chars, k, n_policies = "ab:", 4, 1000
    alphabet = Alphabet(chars)
    fields = request_fields(chars, k)
    universe = len(fields["principal"]) * len(fields["action"]) * len(fields["resource"])
    with criterion(1) as detail:
        start = time.perf_counter()
        grid_bad = 0
        rep_bad = 0
        reps = 0
        for seed in range(n_policies):
            policy = random_policy(random.Random(seed), chars)
            rs = denote(policy, alphabet)
            # full grid: every request of the universe
            grid_bad += int(np.count_nonzero(allowed_grid(policy, fields) != membership_grid(rs, fields)))
            # evaluate() itself on one request per behaviour class
            for r in _class_representatives(policy, rs, fields):
                reps += 1
                if (r in rs) != (evaluate(policy, r) is Decision.ALLOWED):
                    rep_bad += 1
        elapsed = time.perf_counter() - start
        detail["msg"] = (
            f"{n_policies} policies x {universe} requests, {grid_bad} grid disagreements, "
            f"{rep_bad} evaluate() disagreements on {reps} class representatives"
        )
        assert grid_bad == 0
        assert rep_bad == 0
        assert elapsed < 60


def _class_representatives(policy, rs, fields):
    kinds = ("principal", "action", "resource")
    reps = {}
    for i, kind in enumerate(kinds):
        strings = fields[kind]
        pats = sorted({p for st in policy.statements for p in st.matcher(kind).patterns})
        vectors = [tuple(c[i].accepts_many(strings)) for c in rs.cubes]
        extra = list(zip(*vectors)) if vectors else [()] * len(strings)
        reps[kind] = [g[0] for g in field_classes(kind, strings, pats, extra).values()]
    for p in reps["principal"]:
        for a in reps["action"]:
            for r in reps["resource"]:
                yield Request(p, a, r)


def test_criterion_2_brute_force_comparison():
    chars, k, n_pairs = "ab:", 4, 500
    alphabet = Alphabet(chars)
    with criterion(2) as detail:
        start = time.perf_counter()
        mismatches = []
        tally = dict.fromkeys(Relation, 0)
        for i in range(n_pairs):
            rng = random.Random(10_000 + i)
            p1, p2 = random_policy(rng, chars), random_policy(rng, chars)
            v = compare(p1, p2, alphabet=alphabet, bound=k)
            o1, o2 = brute_force_counts(p1, p2, chars, k)
            expected = relation_from(o1 > 0, o2 > 0)
            tally[v.relation] += 1
            if (v.relation, v.only_in_first.count, v.only_in_second.count) != (expected, o1, o2):
                mismatches.append((i, v.relation, expected))
        elapsed = time.perf_counter() - start
        detail["msg"] = (
            f"{n_pairs} pairs, {len(mismatches)} mismatches, verdicts "
            + ", ".join(f"{r.value}={c}" for r, c in tally.items())
        )
        assert not mismatches, mismatches[:5]
        assert elapsed < 120


def test_criterion_3_model_counting():
    previous = kernels.BACKEND
    backends = ["python"] + (["compiled"] if kernels.compiled is not None else [])
    alphabet = Alphabet("ab")
    strings = list(strings_upto("ab", 6))
    patterns = list(strings_upto("ab*?", 4))
    with criterion(3) as detail:
        bad = []
        closed = []
        try:
            for name in backends:
                kernels.use(name)
                for pat in patterns:
                    dfa = compile_glob(pat, alphabet)
                    for k in range(7):
                        expected = sum(1 for s in strings if len(s) <= k and glob_match(pat, s))
                        if count_upto(dfa, k).count != expected:
                            bad.append((name, pat, k))
                for chars in ("ab", "abc"):
                    a = Alphabet(chars)
                    for k in range(11):
                        if count_upto(all_strings(a), k).count != sum(len(chars) ** i for i in range(k + 1)):
                            closed.append((name, chars, k))
        finally:
            kernels.use(previous)
        detail["msg"] = (
            f"kernels {'+'.join(backends)}, {len(patterns)} patterns x k 0..6, {len(bad)} mismatches; "
            f"closed forms |A| in {{2,3}}, k<=10, {len(closed)} mismatches"
        )
        assert not bad, bad[:5]
        assert not closed


def test_criterion_4_dsl_oracle_loop(corpus):
    with criterion(4) as detail:
        result = run_rq3(corpus, OracleBackend(corpus))
        eq = result.distribution[Relation.EQUIVALENT.value]
        detail["msg"] = f"{eq}/{len(corpus)} Equivalent"
        assert eq == len(corpus)
        assert result.equivalent_fraction == 1


def test_criterion_5_rq1_controls(corpus, tmp_path):
    with criterion(5) as detail:
        seeds = range(1, 21)
        control = run_rq1(seeds, OracleBackend())
        mutant = run_rq1(seeds, DenyDroppingBackend(OracleBackend()))
        assert control.mean_rate == 1
        assert mutant.mean_rate < 1
        misclassified = sum(r.misclassified for r in mutant.rows)
        assert misclassified > 0
        assert all(r.misclassified == r.misclassified_denied for r in mutant.rows)

        replay = ReplayBackend(REPLAY)
        files = 0
        for result in (run_rq1(range(1, 9), replay), run_rq2(corpus, replay), run_rq3(corpus, replay)):
            for path in emit_report(result, tmp_path):
                assert path.read_bytes() == (GOLDEN / "replay" / path.name).read_bytes(), path.name
                files += 1
        detail["msg"] = (
            f"control mean {control.to_dict()['mean_rate_unweighted']}, mutant mean "
            f"{mutant.to_dict()['mean_rate_unweighted']} with {misclassified} failures all on denied requests, "
            f"{files} replay report files byte-identical"
        )


def test_criterion_6_spec_generation_bounds():
    with criterion(6) as detail:
        violations = []
        for seed in range(1000):
            spec = generate_request_spec(seed)
            ok = (
                30 <= len(spec.allowed) <= 150
                and 5 <= len(spec.denied) <= 20
                and not set(spec.allowed) & set(spec.denied)
                and len(set(spec.allowed)) == len(spec.allowed)
                and len(set(spec.denied)) == len(spec.denied)
            )
            if not ok:
                violations.append(seed)
        detail["msg"] = f"1000 specs, {len(violations)} violations"
        assert not violations


def test_criterion_7_prompt_fidelity(corpus):
    with criterion(7) as detail:
        sample_spec = RequestSpec(
            (Request("alice", "s3:PutObjectAcl", "mybucket/backups/data/file8.txt"),),
            (Request("bob", "s3:DeleteObject", "mybucket/backups/data/file8.txt"),),
            seed=0,
        )
        entry = next(e for e in corpus if e.id == "s3-public-read")
        built = {
            "concrete.txt": build_prompt(PromptKind.CONCRETE_REQUEST, sample_spec),
            "coarse.txt": build_prompt(PromptKind.COARSE_GRAINED, entry),
            "fine.txt": build_prompt(PromptKind.FINE_GRAINED_SYNTAX, entry),
        }
        for name, prompt in built.items():
            assert prompt.text.encode("utf-8") == (GOLDEN / "prompts" / name).read_bytes(), name
        detail["msg"] = "3 prompts byte-identical to golden strings"


def test_criterion_8_performance(corpus):
    with criterion(8) as detail:
        policies = [e.ground_truth for e in corpus] + [compile_fgspec(e.fg_spec) for e in corpus]
        slowest = 0.0
        for p1 in policies:
            for p2 in policies:
                t = time.perf_counter()
                compare(p1, p2)
                slowest = max(slowest, time.perf_counter() - t)
        start = time.perf_counter()
        oracle = OracleBackend(corpus)
        run_rq1(range(1, 101), oracle)
        run_rq2(corpus, oracle)
        run_rq3(corpus, oracle)
        suite = time.perf_counter() - start
        detail["msg"] = (
            f"slowest of {len(policies) ** 2} corpus compares {slowest:.3f}s (limit 5s), "
            f"oracle rq1(100 specs)+rq2+rq3 {suite:.1f}s (limit 300s)"
        )
        assert slowest < 5
        assert suite < 300
