import pytest
from hypothesis import given
from hypothesis import strategies as st

from normforge.core import CondRef, Rule, RuleType, Theory, parse_literal, violate_set
from normforge.errors import (
    ConstraintViolation,
    LabelOverflowError,
    MalformedHeadError,
    ReferenceTypeError,
    TransformError,
    UnknownJurisdictionError,
)
from normforge.lrml import parse_document
from normforge.render import render_dfl
from normforge.transform import (
    SubruleName,
    TransformOptions,
    reduct,
    subrule_labels,
    transform,
    verify_body,
)

from strategies import theories

L = parse_literal


def dfl(doc_text: str, **options) -> list[str]:
    return render_dfl(transform(parse_document(doc_text), TransformOptions(**options))).splitlines()


def wrap(body: str) -> str:
    return f"<lrml:LegalRuleML><lrml:Statements>{body}</lrml:Statements></lrml:LegalRuleML>"


class TestGoldenListings:
    def test_prescriptive(self, data_text):
        assert dfl(data_text("r1.lrml")) == ["r1: specialOrder(X) => [OBL:NULL:NULL]surcharge(X)"]

    def test_factual(self, data_text):
        assert dfl(data_text("fact1.lrml")) == [">> premiumCustomer(JohnDoe)"]

    def test_override(self, data_text):
        assert dfl(data_text("override.lrml")) == [
            "r1: specialOrder(X) => [OBL:NULL:NULL]surcharge(X)",
            "r2: specialOrder(X),premiumCustomer(Y) => [OBL:NULL:NULL]-surcharge(X)",
            "r2 > r1",
        ]

    def test_penalty_chain(self, data_text):
        assert dfl(data_text("ps1_penalty.lrml"), apply_reduct=False) == [
            "ps1: goods(X),invoice(X) => [OBL:NULL:NULL]payIn7days(X)"
            " (x) [OBL:NULL:NULL]payWith5%Interest(X) (x) [OBL:NULL:NULL]payWith6.5%Interest(X)"
        ]

    def test_penalty_chain_expanded(self, data_text):
        assert dfl(data_text("ps1_penalty.lrml")) == [
            "ps1: goods(X),invoice(X) => [OBL:NULL:NULL]payIn7days(X)",
            "ps1!1: goods(X),invoice(X),[OBL:NULL:NULL]payIn7days(X),-payIn7days(X)"
            " => [OBL:NULL:NULL]payWith5%Interest(X)",
            "ps1!2: goods(X),invoice(X),[OBL:NULL:NULL]payIn7days(X),-payIn7days(X),"
            "[OBL:NULL:NULL]payWith5%Interest(X),-payWith5%Interest(X) => [OBL:NULL:NULL]payWith6.5%Interest(X)",
        ]

    def test_violation_of_literal_in_body(self, data_text):
        lines = dfl(data_text("ps2_ps4.lrml"))
        assert "ps2: [PER:NULL:NULL]rel1(X),[OBL:NULL:NULL]rel2(X),[OBL:NULL:NULL]q,-q" \
               " => [PRO:NULL:NULL]-rel3(X)" in lines

    def test_violation_attached_to_chain_item(self, data_text):
        lines = dfl(data_text("ps2_ps4.lrml"))
        body = "[PER:NULL:NULL]rel1(X),[OBL:NULL:NULL]rel2(X),[OBL:NULL:NULL]q,-q"
        assert f"ps4: {body} => [OBL:NULL:NULL]rel3(X)" in lines
        assert f"ps4!1: {body},[OBL:NULL:NULL]rel3(X),-rel3(X),violation(ps5) => [OBL:NULL:NULL]rel4(X)" in lines

    def test_rule_status_rules_for_referenced_norm(self, data_text):
        lines = dfl(data_text("ps2_ps4.lrml"))
        for expected in [
            "ps5!inf+: delivered(X) => inf(ps5)",
            "ps5!inf-: => -inf(ps5)",
            "ps5!viol-: -inf(ps5) => violation(ps5)",
            "ps5!comp+: inf(ps5),[OBL:NULL:NULL]inspect(X),inspect(X) => compliance(ps5)",
            "ps5!viol+: inf(ps5),[OBL:NULL:NULL]inspect(X),-inspect(X) => violation(ps5)",
            "ps5!inf+ > ps5!inf-",
        ]:
            assert expected in lines


class TestSplits:
    def test_or_in_body(self, data_text):
        with pytest.warns(Warning):
            lines = dfl(data_text("or_split.lrml"))
        assert lines == [
            "ruletemplate3-1: [PER:Y:NULL]rel1(X),[OBL:NULL:NULL]rel2(X) => [PRO:NULL:NULL]rel3(X)",
            "ruletemplate3-2: [PER:Y:NULL]rel1(X),[RIGHT:Y:Y]rel2(X) => [PRO:NULL:NULL]rel3(X)",
        ]

    def test_and_in_head(self, data_text):
        with pytest.warns(Warning):
            lines = dfl(data_text("and_split.lrml"), apply_reduct=False)
        split = [line for line in lines if line[len("ruletemplate3-1"):][:1] in ("a", "b")]
        assert split == [
            "ruletemplate3-1a: [PER:Y:NULL]rel1(X),[OBL:NULL:NULL]rel2(X) => [PRO:NULL:NULL]rel3(X) (x) rel4(X)",
            "ruletemplate3-1b: [PER:Y:NULL]rel1(X),[OBL:NULL:NULL]rel2(X)"
            " => [PRO:NULL:NULL]rel3(X) (x) [OBL:NULL:NULL]rel5(X)",
            "ruletemplate3-2a: [PER:Y:NULL]rel1(X),[RIGHT:Y:Y]rel2(X) => [PRO:NULL:NULL]rel3(X) (x) rel4(X)",
            "ruletemplate3-2b: [PER:Y:NULL]rel1(X),[RIGHT:Y:Y]rel2(X)"
            " => [PRO:NULL:NULL]rel3(X) (x) [OBL:NULL:NULL]rel5(X)",
        ]

    def test_label_scheme(self):
        assert [str(n) for n in subrule_labels("b", 1, 1)] == ["b"]
        assert [str(n) for n in subrule_labels("b", 3, 1)] == ["b-1", "b-2", "b-3"]
        assert [str(n) for n in subrule_labels("b", 1, 2)] == ["b-1", "b-2"]
        assert [str(n) for n in subrule_labels("b", 2, 2)] == ["b-1a", "b-1b", "b-2a", "b-2b"]

    def test_label_overflow(self):
        with pytest.raises(LabelOverflowError):
            subrule_labels("b", 2, 27)

    @given(st.from_regex(r"[a-z][a-z0-9]{0,6}", fullmatch=True),
           st.none() | st.integers(1, 40), st.none() | st.sampled_from("abcz"))
    def test_subrule_name_round_trip(self, base, n, c):
        name = SubruleName(base, n, c if n is not None else None)
        assert SubruleName.parse(str(name)) == name


class TestConstraints:
    def test_malformed_head(self, data_text):
        with pytest.raises(TransformError) as exc:
            transform(parse_document(data_text("malformed_head.lrml")))
        (key, err), = exc.value.failures
        assert key == "ps9" and isinstance(err, MalformedHeadError)

    def test_constitutive_with_deontic_head(self):
        xml = wrap(
            '<lrml:ConstitutiveStatement key="cs1"><ruleml:Rule><ruleml:then><lrml:Obligation>'
            '<ruleml:Atom><ruleml:Rel iri=":p"/></ruleml:Atom></lrml:Obligation></ruleml:then>'
            "</ruleml:Rule></lrml:ConstitutiveStatement>")
        with pytest.raises(TransformError) as exc:
            transform(parse_document(xml))
        assert isinstance(exc.value.failures[0][1], ConstraintViolation)

    def test_failures_are_aggregated(self, data_text):
        bad = '<lrml:PrescriptiveStatement key="{}"><ruleml:Rule><ruleml:if><ruleml:Atom>' \
              '<ruleml:Rel iri=":p"/></ruleml:Atom></ruleml:if></ruleml:Rule></lrml:PrescriptiveStatement>'
        with pytest.raises(TransformError) as exc:
            transform(parse_document(wrap(bad.format("a") + bad.format("b"))))
        assert [k for k, _ in exc.value.failures] == ["a", "b"]

    def test_override_of_factual_statement(self, data_text):
        xml = data_text("override.lrml").replace(
            "</lrml:Statements>",
            '<lrml:FactualStatement key="f1"><lrml:hasTemplate><ruleml:Atom><ruleml:Rel iri=":p"/>'
            '</ruleml:Atom></lrml:hasTemplate></lrml:FactualStatement>'
            '<lrml:OverrideStatement key="o2"><lrml:Override over="#r1" under="#f1"/></lrml:OverrideStatement>'
            "</lrml:Statements>")
        with pytest.raises(TransformError) as exc:
            transform(parse_document(xml))
        assert isinstance(exc.value.failures[0][1], ReferenceTypeError)


class TestJurisdiction:
    def test_italy_subtheory(self, data_text):
        lines = dfl(data_text("jurisdiction.lrml"), jurisdiction="italy")
        assert lines == [
            "ps3: lateDelivery(X) ~> [PRO:NULL:NULL]chargeFee(X)",
            "ps4: invoice(X) => [OBL:NULL:NULL]pay(X)",
        ]

    def test_override_survives_only_with_both_sides(self, data_text):
        lines = dfl(data_text("jurisdiction.lrml"), jurisdiction="france")
        assert lines == [
            "ps4: invoice(X) => [OBL:NULL:NULL]pay(X)",
            "ps5: lateDelivery(X) => [OBL:NULL:NULL]chargeFee(X)",
        ]

    def test_no_filter_keeps_default_strengths(self, data_text):
        lines = dfl(data_text("jurisdiction.lrml"))
        assert "ps3: lateDelivery(X) => [PRO:NULL:NULL]chargeFee(X)" in lines
        assert "ps5 > ps3" in lines

    def test_unknown_jurisdiction(self, data_text):
        with pytest.raises(UnknownJurisdictionError) as exc:
            transform(parse_document(data_text("jurisdiction.lrml")), TransformOptions(jurisdiction="spain"))
        assert exc.value.known == ["italy", "france"]


class TestReduct:
    def test_superiority_inherited_by_all_pieces(self):
        a, b, c = L("[OBL]a"), L("[OBL]b"), L("[OBL]c")
        t = Theory(
            rules=(Rule("r", RuleType.DEFEASIBLE, (), (a, b, c)), Rule("s", RuleType.DEFEASIBLE, (), (L("[OBL]-a"), c))),
            superiority=(("r", "s"),),
        )
        out = reduct(t)
        assert [r.label for r in out.rules] == ["r", "r!1", "r!2", "s", "s!1"]
        assert len(out.superiority) == 6
        assert out.rule("r!2").antecedent == violate_set(a) + violate_set(b)

    @given(theories())
    def test_terminates_with_singleton_heads(self, t):
        out = reduct(t)
        assert not out.has_chains()
        assert len(out.rules) == sum(len(r.head) for r in t.rules)
        assert reduct(out) == out

    @given(theories())
    def test_superiority_inheritance_count(self, t):
        out = reduct(t)
        sizes = {r.label: len(r.head) for r in t.rules}
        assert len(out.superiority) == sum(sizes[w] * sizes[l] for w, l in t.superiority)

    @given(theories())
    def test_piece_bodies_accumulate_violations(self, t):
        out = reduct(t)
        for rule in t.rules:
            for i in range(1, len(rule.head)):
                piece = out.rule(f"{rule.label}!{i}")
                assert piece.head == (rule.head[i],)
                assert set(violate_set(rule.head[i - 1])) <= set(piece.antecedent)


class TestVerifyBody:
    @given(theories(chains=False), st.data())
    def test_status_atoms_are_fresh(self, t, data):
        if not t.rules:
            return
        target = data.draw(st.sampled_from(t.rules))
        if target.head[0].tag.value in ("PER", "RIGHT"):
            return
        referrer = Rule("ref", RuleType.DEFEASIBLE, (), (L("z"),), body_refs=(CondRef("violation", target.label),))
        # reuse the generator's predicate names to provoke collisions
        clash = Rule("clash", RuleType.DEFEASIBLE, (L("inf"), L("violation")), (L("compliance"),))
        base = Theory(t.facts, t.rules + (referrer, clash), t.superiority)
        out = verify_body(base)
        new_preds = out.predicates() - base.predicates()
        assert len(new_preds) == 3
        assert not new_preds & base.predicates()
        assert not any(r.body_refs for r in out.rules)
