import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import random_policy, reference_decide
from policysynth.errors import InvalidPolicy, InvalidRequest, MalformedJson, UnsupportedFeature
from policysynth.policy import (
    Decision,
    Effect,
    Matcher,
    Policy,
    Polarity,
    Request,
    Statement,
    evaluate,
    glob_match,
    parse_policy,
    serialize_policy,
)

MINIMAL = (
    '{"Version":"2012-10-17","Statement":[{"Effect":"Allow","Principal":"*",'
    '"Action":"s3:GetObject","Resource":"arn:aws:s3:::b/*"}]}'
)


def allow(principal="*", action="*", resource="*", effect=Effect.ALLOW):
    return Statement(effect, Matcher((principal,)), Matcher((action,)), Matcher((resource,)))


class TestParse:
    def test_minimal_document(self):
        p = parse_policy(MINIMAL)
        assert p.version == "2012-10-17"
        assert len(p.statements) == 1
        st_ = p.statements[0]
        assert st_.effect is Effect.ALLOW
        assert st_.principal == Matcher(("*",))
        assert st_.action == Matcher(("s3:GetObject",))
        assert st_.resource == Matcher(("arn:aws:s3:::b/*",))
        assert all(st_.matcher(k).polarity is Polarity.POSITIVE for k in ("principal", "action", "resource"))

    def test_condition_is_unsupported(self):
        doc = json.loads(MINIMAL)
        doc["Statement"][0]["Condition"] = {"Bool": {"aws:SecureTransport": "true"}}
        with pytest.raises(UnsupportedFeature):
            parse_policy(json.dumps(doc))

    def test_unknown_statement_key_is_unsupported(self):
        doc = json.loads(MINIMAL)
        doc["Statement"][0]["Foo"] = 1
        with pytest.raises(UnsupportedFeature):
            parse_policy(json.dumps(doc))

    def test_truncated_text(self):
        with pytest.raises(MalformedJson):
            parse_policy(MINIMAL[:-7])

    def test_aws_principal_map_flattens(self):
        doc = json.loads(MINIMAL)
        doc["Statement"][0]["Principal"] = {"AWS": ["arn:aws:iam::1:user/a", "arn:aws:iam::1:user/b"]}
        p = parse_policy(json.dumps(doc))
        assert p.statements[0].principal.patterns == ("arn:aws:iam::1:user/a", "arn:aws:iam::1:user/b")

    def test_missing_principal_defaults_to_any(self):
        doc = json.loads(MINIMAL)
        del doc["Statement"][0]["Principal"]
        assert parse_policy(json.dumps(doc)).statements[0].principal == Matcher.any()

    def test_single_statement_object(self):
        doc = json.loads(MINIMAL)
        doc["Statement"] = doc["Statement"][0]
        assert len(parse_policy(json.dumps(doc)).statements) == 1

    @pytest.mark.parametrize(
        "mutate",
        [
            lambda s: s.pop("Effect"),
            lambda s: s.update(Effect="Maybe"),
            lambda s: s.pop("Action"),
            lambda s: s.pop("Resource"),
            lambda s: s.update(NotAction="s3:*"),
            lambda s: s.update(Action=[]),
            lambda s: s.update(Resource=7),
        ],
    )
    def test_structural_errors(self, mutate):
        doc = json.loads(MINIMAL)
        mutate(doc["Statement"][0])
        with pytest.raises(InvalidPolicy):
            parse_policy(json.dumps(doc))

    def test_not_variants(self):
        doc = json.loads(MINIMAL)
        s = doc["Statement"][0]
        s["NotAction"] = s.pop("Action")
        s["NotResource"] = s.pop("Resource")
        p = parse_policy(json.dumps(doc))
        assert p.statements[0].action.negated
        assert p.statements[0].resource.negated
        assert not p.statements[0].principal.negated


class TestSerialize:
    def test_round_trip_minimal(self):
        p = parse_policy(MINIMAL)
        assert parse_policy(serialize_policy(p)) == p

    def test_empty_policy(self):
        assert serialize_policy(Policy()) == '{"Version":"2012-10-17","Statement":[]}'

    def test_negated_action_key(self):
        st_ = Statement(Effect.DENY, action=Matcher(("s3:*",), Polarity.NEGATED))
        out = json.loads(serialize_policy(Policy((st_,))))
        assert "NotAction" in out["Statement"][0]
        assert "Action" not in out["Statement"][0]

    def test_key_order_is_stable(self):
        text = serialize_policy(parse_policy(MINIMAL))
        assert text.index('"Effect"') < text.index('"Principal"') < text.index('"Action"') < text.index('"Resource"')

    @settings(max_examples=200, deadline=None)
    @given(st.integers(0, 2**32))
    def test_round_trip_random(self, seed):
        p = random_policy(random.Random(seed), "ab:", max_statements=4)
        text = serialize_policy(p)
        assert parse_policy(text) == p
        assert serialize_policy(parse_policy(text)) == text


class TestGlobMatch:
    @pytest.mark.parametrize(
        "pattern,value,kind,expected",
        [
            ("mybucket/*", "mybucket/backups/data/file8.txt", "resource", True),
            ("file?.txt", "file8.txt", "resource", True),
            ("file?.txt", "file10.txt", "resource", False),
            ("s3:getobject", "s3:GetObject", "action", True),
            ("s3:getobject", "s3:GetObject", "resource", False),
            ("arn:*:b", "arn:aws:s3:::b", "resource", True),
            ("a.c", "abc", "resource", False),
            ("[ab]", "a", "resource", False),
            ("", "", "resource", True),
        ],
    )
    def test_examples(self, pattern, value, kind, expected):
        assert glob_match(pattern, value, kind) is expected

    @given(st.text(alphabet="ab/:.-", max_size=12))
    def test_star_and_self(self, v):
        assert glob_match("*", v)
        assert glob_match(v, v)


ALICE_ACL_REQUEST = Request("alice", "s3:PutObjectAcl", "mybucket/backups/data/file8.txt")


class TestEvaluate:
    def test_exact_match_allowed(self):
        p = Policy((allow(ALICE_ACL_REQUEST.principal, ALICE_ACL_REQUEST.action, ALICE_ACL_REQUEST.resource),))
        assert evaluate(p, ALICE_ACL_REQUEST) is Decision.ALLOWED

    def test_empty_policy_implicit_deny(self):
        assert evaluate(Policy(), ALICE_ACL_REQUEST) is Decision.IMPLICIT_DENY

    def test_deny_overrides(self):
        p = Policy((allow(action="s3:*"), allow(action="s3:PutObject", effect=Effect.DENY)))
        r = Request("alice", "s3:PutObject", "b/x")
        assert evaluate(p, r) is Decision.EXPLICIT_DENY
        assert reference_decide(p, r.principal, r.action, r.resource) is Decision.EXPLICIT_DENY
        assert evaluate(p, Request("alice", "s3:GetObject", "b/x")) is Decision.ALLOWED

    def test_negated_matcher(self):
        st_ = Statement(Effect.ALLOW, action=Matcher(("s3:delete*",), Polarity.NEGATED))
        p = Policy((st_,))
        assert evaluate(p, Request("a", "s3:GetObject", "r")) is Decision.ALLOWED
        assert evaluate(p, Request("a", "s3:DeleteObject", "r")) is Decision.IMPLICIT_DENY

    @pytest.mark.parametrize(
        "fields",
        [("", "s3:a", "r"), ("a", "s3", "r"), ("a", "s3:a:b", "r"), ("a*", "s3:a", "r"), ("a", "s3:a", "r?"), ("a", ":x", "r")],
    )
    def test_request_invariants(self, fields):
        with pytest.raises(InvalidRequest):
            Request(*fields)


requests_st = st.builds(
    Request,
    st.text(alphabet="ab", min_size=1, max_size=3),
    st.builds(lambda a, b: a + ":" + b, st.text(alphabet="abAB", min_size=1, max_size=2), st.text(alphabet="ab", min_size=1, max_size=2)),
    st.text(alphabet="ab:", min_size=1, max_size=3),
)


class TestEvaluateProperties:
    @settings(max_examples=300, deadline=None)
    @given(st.integers(0, 2**32), requests_st)
    def test_agrees_with_reference(self, seed, r):
        p = random_policy(random.Random(seed), "ab:")
        assert evaluate(p, r) is reference_decide(p, r.principal, r.action, r.resource)

    @settings(max_examples=300, deadline=None)
    @given(st.integers(0, 2**32), requests_st)
    def test_deny_dominance(self, seed, r):
        rng = random.Random(seed)
        p = random_policy(rng, "ab:")
        if any(s.effect is Effect.DENY and s.matches(r.principal, r.action, r.resource) for s in p.statements):
            assert evaluate(p, r) is Decision.EXPLICIT_DENY

    @settings(max_examples=300, deadline=None)
    @given(st.integers(0, 2**32), requests_st)
    def test_permutation_invariance(self, seed, r):
        rng = random.Random(seed)
        p = random_policy(rng, "ab:")
        stmts = list(p.statements)
        rng.shuffle(stmts)
        assert evaluate(Policy(tuple(stmts)), r) is evaluate(p, r)

    @settings(max_examples=300, deadline=None)
    @given(st.integers(0, 2**32), requests_st)
    def test_allow_monotonicity(self, seed, r):
        rng = random.Random(seed)
        p = random_policy(rng, "ab:")
        extra = random_policy(rng, "ab:", max_statements=1)
        extra = [s for s in extra.statements]
        if not extra:
            return
        added = Statement(Effect.ALLOW, extra[0].principal, extra[0].action, extra[0].resource)
        before = evaluate(p, r)
        after = evaluate(Policy(p.statements + (added,)), r)
        if before is Decision.EXPLICIT_DENY:
            assert after is Decision.EXPLICIT_DENY
        if before is Decision.ALLOWED:
            assert after is Decision.ALLOWED
