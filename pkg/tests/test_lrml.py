import warnings

import pytest

from normforge.core import Constant, RuleType, Variable
from normforge.errors import (
    DanglingReferenceError,
    DuplicateKeyError,
    LrmlParseError,
    NormforgeWarning,
    StructuralError,
)
from normforge.lrml import (
    NodeKind,
    StatementKind,
    apply_associations,
    norm_key,
    parse_document,
    resolve_keyrefs,
    strength_from_iri,
)


def wrap(body: str) -> str:
    return f"<lrml:LegalRuleML><lrml:Statements>{body}</lrml:Statements></lrml:LegalRuleML>"


ATOM = '<ruleml:Atom><ruleml:Rel iri=":{}"/><ruleml:Var>X</ruleml:Var></ruleml:Atom>'


def prescriptive(key: str, head: str = "p", body: str = "q", extra: str = "") -> str:
    return (
        f'<lrml:PrescriptiveStatement key="{key}"><ruleml:Rule {extra}>'
        f"<ruleml:if>{ATOM.format(body)}</ruleml:if>"
        f"<ruleml:then><lrml:Obligation>{ATOM.format(head)}</lrml:Obligation></ruleml:then>"
        f"</ruleml:Rule></lrml:PrescriptiveStatement>"
    )


class TestParsing:
    def test_prescriptive_listing(self, data_text):
        doc = parse_document(data_text("r1.lrml"))
        (s,) = doc.statements
        assert s.kind is StatementKind.PRESCRIPTIVE and s.key == "r1"
        assert s.rule.key == "ruletemplate1"
        assert s.rule.strength is RuleType.DEFEASIBLE
        assert s.rule.body.kind is NodeKind.AND
        atom = s.rule.body.children[0]
        assert (atom.predicate, atom.args) == ("specialOrder", (Variable("X"),))
        assert s.rule.head.kind is NodeKind.OBLIGATION

    def test_factual_listing_individual_by_iri(self, data_text):
        (s,) = parse_document(data_text("fact1.lrml")).statements
        assert s.kind is StatementKind.FACTUAL
        assert s.atom.predicate == "premiumCustomer"
        assert s.atom.args == (Constant("JohnDoe"),)

    def test_override_statement_without_key(self, data_text):
        doc = parse_document(data_text("override.lrml"))
        assert [(p.over, p.under) for p in doc.overrides] == [("r2", "r1")]

    def test_penalty_and_reparation(self, data_text):
        doc = parse_document(data_text("ps1_penalty.lrml"))
        assert list(doc.penalties) == ["pen1"]
        assert doc.penalties["pen1"].kind is NodeKind.SUBORDER_LIST
        (rep,) = doc.reparations
        assert (rep.key, rep.penalty, rep.statement) == ("rep1", "pen1", "ps1")

    def test_slots(self, data_text):
        with pytest.warns(NormforgeWarning, match="atom5"):
            doc = parse_document(data_text("or_split.lrml"))
        right = next(n for n in doc.statements[0].nodes() if n.kind is NodeKind.RIGHT)
        assert (right.bearer, right.auxiliary) == ("Y", "Y")

    def test_jurisdictions_and_associations(self, data_text):
        doc = parse_document(data_text("jurisdiction.lrml"))
        assert doc.jurisdiction_keys() == ["italy", "france"]
        asn = doc.associations[0]
        assert asn.key == "asn-ps3" and asn.targets == ("ps3",) and asn.jurisdictions == ("italy",)
        assert doc.statement("ps4").rule.universal

    def test_keys_are_normalized(self):
        assert norm_key("#ps1") == norm_key(":ps1") == "ps1"

    @pytest.mark.parametrize(
        "iri, expected",
        [
            ("http://example.org/legalruleml/ontology#defeasible1", RuleType.DEFEASIBLE),
            ("http://spin.nicta.com.au/spindle/ruleStrength#defeater", RuleType.DEFEATER),
            ("#strict", RuleType.STRICT),
            ("#bogus", None),
        ],
    )
    def test_strength_iri(self, iri, expected):
        assert strength_from_iri(iri) is expected


class TestErrors:
    def test_malformed_xml_reports_position(self):
        with pytest.raises(LrmlParseError) as exc:
            parse_document("<lrml:LegalRuleML>\n<lrml:Statements>\n</lrml:LegalRuleML>")
        assert exc.value.line == 3

    def test_duplicate_statement_key(self):
        with pytest.raises(DuplicateKeyError) as exc:
            parse_document(wrap(prescriptive("ps1") + prescriptive("ps1")))
        assert exc.value.key == "ps1"

    def test_suborder_list_in_body(self):
        xml = wrap(
            '<lrml:PrescriptiveStatement key="ps1"><ruleml:Rule><ruleml:if><lrml:SuborderList>'
            + ATOM.format("q")
            + "</lrml:SuborderList></ruleml:if><ruleml:then>"
            + ATOM.format("p")
            + "</ruleml:then></ruleml:Rule></lrml:PrescriptiveStatement>"
        )
        with pytest.raises(StructuralError):
            parse_document(xml)

    def test_unknown_elements_warn_and_are_kept(self):
        xml = wrap(prescriptive("ps1")).replace(
            "<lrml:Statements>", "<lrml:Statements><lrml:Comment>note</lrml:Comment>")
        with pytest.warns(NormforgeWarning, match="Comment"):
            doc = parse_document(xml)
        assert "Comment" in doc.extras[0]
        assert len(doc.statements) == 1

    def test_dangling_violation_reference(self):
        xml = wrap(prescriptive("ps1").replace(
            "<ruleml:if>", '<ruleml:if><ruleml:And><lrml:Violation keyref="#nowhere"/>').replace(
            "</ruleml:if>", "</ruleml:And></ruleml:if>"))
        with pytest.raises(DanglingReferenceError) as exc:
            resolve_keyrefs(parse_document(xml))
        assert exc.value.key == "nowhere"

    def test_dangling_override(self):
        xml = wrap(prescriptive("ps1") + '<lrml:OverrideStatement><lrml:Override over="#ps1" under="#ps7"/>'
                   "</lrml:OverrideStatement>")
        with pytest.raises(DanglingReferenceError):
            resolve_keyrefs(parse_document(xml))


class TestResolution:
    def test_template_keyref_inherits_body(self, data_text):
        doc = resolve_keyrefs(parse_document(data_text("ps2_ps4.lrml")))
        ps2, ps4 = doc.statement("ps2"), doc.statement("ps4")
        assert ps4.rule.body == ps2.rule.body
        assert ps4.rule.head.kind is NodeKind.SUBORDER_LIST

    def test_reference_targets_are_classified(self, data_text):
        doc = resolve_keyrefs(parse_document(data_text("ps2_ps4.lrml")))
        refs = {n.keyref: n.target for s in doc.statements for n in s.nodes() if n.kind is NodeKind.VIOLATION}
        assert refs == {"ps3": "literal", "ps5": "rule"}

    def test_association_strength_is_scoped_to_its_jurisdiction(self, data_text):
        doc = resolve_keyrefs(parse_document(data_text("jurisdiction.lrml")))
        assert apply_associations(doc).statement("ps3").strength is None
        scoped = apply_associations(doc, "italy").statement("ps3")
        assert scoped.strength is RuleType.DEFEATER
        assert scoped.jurisdictions == {"italy"}

    def test_association_to_missing_target_warns(self):
        xml = wrap(prescriptive("ps1")).replace(
            "<lrml:Statements>",
            '<lrml:Associations><lrml:Association key="a1"><lrml:toTarget keyref="#ghost"/>'
            "</lrml:Association></lrml:Associations><lrml:Statements>")
        doc = parse_document(xml)
        with pytest.warns(NormforgeWarning, match="ghost"):
            out = apply_associations(resolve_keyrefs(doc))
        assert out.statements == doc.statements

    def test_later_association_wins(self):
        asn = ('<lrml:Association key="{k}"><lrml:appliesModality iri="#{s}"/>'
               '<lrml:toTarget keyref="#ps1"/></lrml:Association>')
        xml = wrap(prescriptive("ps1")).replace(
            "<lrml:Statements>",
            "<lrml:Associations>" + asn.format(k="a1", s="defeater") + asn.format(k="a2", s="strict")
            + "</lrml:Associations><lrml:Statements>")
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            doc = apply_associations(resolve_keyrefs(parse_document(xml)))
        assert doc.statement("ps1").strength is RuleType.STRICT
