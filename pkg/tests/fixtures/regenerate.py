"""Rebuild the replay transcripts and golden reports under tests/.

    python3 tests/fixtures/regenerate.py            # replay responses only
    python3 tests/fixtures/regenerate.py --golden   # also rewrite tests/golden

The responses imitate what a chat model returns: bare JSON, fenced JSON with
prose, refusals, malformed or unsupported documents, and policies that are
broader, narrower or sideways from the intended one.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
from pathlib import Path

from policysynth.harness import emit_report, run_rq1, run_rq2, run_rq3
from policysynth.policy import Effect, Matcher, Policy, Statement, policy_to_obj, serialize_policy
from policysynth.specgen import generate_request_spec, load_corpus
from policysynth.synth import OracleBackend, PromptKind, ReplayBackend, build_prompt
from policysynth.synth.backends import ALLOW_ALL_POLICY, concrete_oracle_policy

HERE = Path(__file__).resolve().parent
REPLAY = HERE / "replay"
GOLDEN = HERE.parent / "golden"
RQ1_SEEDS = range(1, 9)


def fenced(policy: Policy, before: str = "Here is the policy:", after: str = "") -> str:
    text = f"{before}\n\n```json\n{serialize_policy(policy, indent=2)}\n```\n"
    return text + (f"\n{after}\n" if after else "")


def without_denies(policy: Policy) -> Policy:
    return Policy(tuple(s for s in policy.statements if s.effect is not Effect.DENY), policy.version)


def without_first_allow(policy: Policy) -> Policy:
    out, dropped = [], False
    for s in policy.statements:
        if s.effect is Effect.ALLOW and not dropped:
            dropped = True
            continue
        out.append(s)
    return Policy(tuple(out), policy.version)


def moved_first_allow(policy: Policy) -> Policy:
    out, moved = [], False
    for s in policy.statements:
        if s.effect is Effect.ALLOW and not moved:
            moved = True
            s = dataclasses.replace(s, resource=Matcher(("arn:aws:s3:::scratch-bucket/*",)))
        out.append(s)
    return Policy(tuple(out), policy.version)


def with_condition(policy: Policy) -> str:
    obj = policy_to_obj(policy)
    obj["Statement"][0]["Condition"] = {"Bool": {"aws:SecureTransport": "true"}}
    return "```json\n" + json.dumps(obj, indent=2) + "\n```\n"


REFUSAL = "I'm sorry, but I can't help with writing that policy without more details about your account."


def rq1_response(seed: int) -> str:
    spec = generate_request_spec(seed)
    widened = concrete_oracle_policy(spec.allowed, spec.denied, widen=True)
    exact = concrete_oracle_policy(spec.allowed, spec.denied, widen=False)
    return {
        1: serialize_policy(widened, indent=2),
        2: fenced(widened, "Sure! Below is an IAM policy that grants the listed requests and blocks the denied ones."),
        3: fenced(without_denies(widened), "This policy allows the requested access:"),
        4: REFUSAL,
        5: "```json\n" + serialize_policy(widened, indent=2)[:-2] + ",\n  ]\n}\n```",
        6: fenced(Policy((Statement(Effect.ALLOW),)), "A simple policy that satisfies every allowed request:"),
        7: with_condition(widened),
        8: fenced(exact, "Policy:", "Alternatively you could use:\n" + serialize_policy(widened)),
    }[seed]


def corpus_response(index: int, truth: Policy, experiment: str) -> str:
    if experiment == "rq3":
        mode = {4: "narrow", 9: "nodeny", 12: "none"}.get(index, "same")
    else:
        mode = ("same", "broad", "nodeny", "narrow", "moved", "same", "none", "malformed")[index % 8]
    if mode == "same":
        return fenced(truth) if index % 2 else serialize_policy(truth, indent=2)
    if mode == "broad":
        return "```\n" + ALLOW_ALL_POLICY + "\n```\n"
    if mode == "nodeny":
        return fenced(without_denies(truth), "Here's a policy based on your description:")
    if mode == "narrow":
        return fenced(without_first_allow(truth) if len(truth.statements) > 1 else truth)
    if mode == "moved":
        return fenced(moved_first_allow(truth), "The following policy should work:")
    if mode == "malformed":
        return serialize_policy(truth, indent=2).replace('"Effect"', "Effect", 1)
    return "Could you clarify which account the resources belong to?"


def write_replay() -> None:
    REPLAY.mkdir(parents=True, exist_ok=True)
    for old in REPLAY.glob("*.txt"):
        old.unlink()
    responses = {}
    for seed in RQ1_SEEDS:
        prompt = build_prompt(PromptKind.CONCRETE_REQUEST, generate_request_spec(seed))
        responses[prompt.sha256] = rq1_response(seed)
    corpus = load_corpus()
    for experiment, kind in (("rq2", PromptKind.COARSE_GRAINED), ("rq3", PromptKind.FINE_GRAINED_SYNTAX)):
        for i, entry in enumerate(corpus):
            prompt = build_prompt(kind, entry)
            responses[prompt.sha256] = corpus_response(i, entry.ground_truth, experiment)
    for digest, text in responses.items():
        (REPLAY / f"{digest}.txt").write_bytes(text.encode("utf-8"))
    print(f"wrote {len(responses)} responses to {REPLAY}")


def write_golden() -> None:
    corpus = load_corpus()
    replay = ReplayBackend(REPLAY)
    runs = {
        "replay": (run_rq1(RQ1_SEEDS, replay), run_rq2(corpus, replay), run_rq3(corpus, replay)),
        "oracle": (run_rq3(corpus, OracleBackend(corpus)),),
    }
    for name, results in runs.items():
        for result in results:
            for path in emit_report(result, GOLDEN / name):
                print("wrote", path)


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--golden", action="store_true")
    args = ap.parse_args()
    write_replay()
    if args.golden:
        write_golden()


if __name__ == "__main__":
    main()
