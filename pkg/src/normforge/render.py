"""Theory serialisation: LegalRuleML XML out, DFL text out and back in."""

from __future__ import annotations

import re
import xml.etree.ElementTree as ET

from .core import (
    Constant,
    ModalLiteral,
    Rule,
    RuleType,
    Tag,
    Theory,
    format_literal,
    parse_literal,
)
from .errors import DflSyntaxError, LiteralSyntaxError
from .lrml import LRML_NS, RULEML_NS

__all__ = ["escape_key", "unescape_key", "render_lrml", "render_dfl", "parse_dfl"]

# Characters that cannot survive as statement keys: `!` is reserved for
# generated labels, `#` and `:` are stripped from keyrefs by the reader.
_ESCAPES = {"!": "_x21_", "#": "_x23_", ":": "_x3a_"}
_UNESCAPE = re.compile("|".join(map(re.escape, _ESCAPES.values())))
_REVERSE = {v: k for k, v in _ESCAPES.items()}


def escape_key(label: str) -> str:
    return "".join(_ESCAPES.get(ch, ch) for ch in label)


def unescape_key(key: str) -> str:
    return _UNESCAPE.sub(lambda m: _REVERSE[m[0]], key)


# --------------------------------------------------------------------------
# LegalRuleML

_DEONTIC = {Tag.OBL: "Obligation", Tag.PER: "Permission", Tag.PRO: "Prohibition", Tag.RIGHT: "Right"}
_STRENGTH_IRI = "http://example.org/legalruleml/ontology#"


def _sub(parent: ET.Element, tag: str, **attrib: str) -> ET.Element:
    return ET.SubElement(parent, tag, attrib)


def _term(parent: ET.Element, term) -> None:
    el = _sub(parent, "ruleml:Ind" if isinstance(term, Constant) else "ruleml:Var")
    el.text = term.name


def _literal(parent: ET.Element, lit: ModalLiteral) -> None:
    if lit.tag is not Tag.NONE:
        parent = _sub(parent, f"lrml:{_DEONTIC[lit.tag]}")
        for role, value in (("Bearer", lit.modality.bearer), ("AuxiliaryParty", lit.modality.auxiliary)):
            if value is not None:
                slot = _sub(parent, "lrml:slot")
                _sub(slot, f"lrml:{role}")
                _sub(slot, "ruleml:Ind").text = value
    if lit.negated:
        parent = _sub(parent, "ruleml:Neg")
    atom = _sub(parent, "ruleml:Atom")
    _sub(atom, "ruleml:Rel", iri=f":{lit.atom.predicate}")
    for t in lit.atom.args:
        _term(atom, t)


def _strength(parent: ET.Element, name: str) -> None:
    holder = _sub(parent, "lrml:hasStrength")
    _sub(holder, "lrml:DefeasibleStrength", iri=f"{_STRENGTH_IRI}{name}")


def _rule_statement(parent: ET.Element, rule: Rule, key: str) -> None:
    modal = any(h.tag is not Tag.NONE for h in rule.head)
    constitutive = rule.rtype is RuleType.STRICT and not modal
    stmt = _sub(parent, "lrml:ConstitutiveStatement" if constitutive else "lrml:PrescriptiveStatement", key=key)
    el = _sub(stmt, "ruleml:Rule")
    if rule.rtype is RuleType.DEFEATER:
        _strength(el, "defeater")
    elif rule.rtype is RuleType.STRICT and not constitutive:
        _strength(el, "strict")
    if rule.antecedent or rule.body_refs:
        body = _sub(_sub(el, "ruleml:if"), "ruleml:And")
        for a in rule.antecedent:
            _literal(body, a)
        for ref in rule.body_refs:
            _sub(body, f"lrml:{ref.kind.capitalize()}", keyref=f"#{escape_key(ref.key)}")
    _literal(_sub(el, "ruleml:then"), rule.head[0])


def _fresh_keys(stem: str, used: set[str]):
    i = 0
    while True:
        i += 1
        key = f"{stem}{i}"
        if key not in used:
            used.add(key)
            yield key


def render_lrml(theory: Theory) -> str:
    """LegalRuleML rendering built only from what the theory records.

    Reparation chains become a PenaltyStatement holding the tail plus a
    ReparationStatement binding it to the rule. Head-attached references and
    any document metadata are not representable and are dropped.
    """
    t = theory.normalized()
    root = ET.Element("lrml:LegalRuleML", {"xmlns:lrml": LRML_NS, "xmlns:ruleml": RULEML_NS})
    statements = _sub(root, "lrml:Statements")
    keys = {r.label: escape_key(r.label) for r in t.rules}
    used = set(keys.values())
    fact_keys = _fresh_keys("fact", used)
    for f in t.facts:
        stmt = _sub(statements, "lrml:FactualStatement", key=next(fact_keys))
        _literal(_sub(stmt, "lrml:hasTemplate"), f)
    for rule in t.rules:
        _rule_statement(statements, rule, keys[rule.label])
    if t.superiority:
        stmt = _sub(statements, "lrml:OverrideStatement", key=next(_fresh_keys("override", used)))
        for w, l in t.superiority:
            _sub(stmt, "lrml:Override", over=f"#{keys.get(w, escape_key(w))}",
                 under=f"#{keys.get(l, escape_key(l))}")
    pen_keys = _fresh_keys("pen", used)
    rep_keys = _fresh_keys("rep", used)
    for rule in t.rules:
        if len(rule.head) < 2:
            continue
        pen = next(pen_keys)
        lst = _sub(_sub(statements, "lrml:PenaltyStatement", key=pen), "lrml:SuborderList")
        for item in rule.head[1:]:
            _literal(lst, item)
        rep = _sub(_sub(statements, "lrml:ReparationStatement", key=next(rep_keys)), "lrml:Reparation")
        _sub(rep, "lrml:appliesPenalty", keyref=f"#{pen}")
        _sub(rep, "lrml:toPrescriptiveStatement", keyref=f"#{keys[rule.label]}")
    ET.indent(root)
    return '<?xml version="1.0" encoding="UTF-8"?>\n' + ET.tostring(root, encoding="unicode") + "\n"


# --------------------------------------------------------------------------
# DFL

_ARROWS = {RuleType.STRICT: "->", RuleType.DEFEASIBLE: "=>", RuleType.DEFEATER: "~>"}
_BY_ARROW = {v: k for k, v in _ARROWS.items()}
_RULE_LINE = re.compile(r"^(?P<label>[^\s:]+)\s*:\s*(?P<body>.*?)\s*(?P<arrow>->|=>|~>)\s*(?P<head>.+)$")
_SUP_LINE = re.compile(r"^(?P<w>[^\s>]+)\s*>\s*(?P<l>[^\s>]+)$")
_CHAIN_SEP = re.compile(r"\s+\(x\)\s+")


def render_dfl(theory: Theory) -> str:
    """One line per fact, rule and superiority pair, in canonical order."""
    t = theory.normalized()
    lines = [f">> {format_literal(f, fact=True)}" for f in t.facts]
    lines += [str(r) for r in t.rules]
    lines += [f"{w} > {l}" for w, l in t.superiority]
    return "".join(line + "\n" for line in lines)


def _split_body(text: str) -> list[str]:
    out, cur, depth, quoted = [], [], 0, False
    for ch in text:
        if ch == '"':
            quoted = not quoted
        elif not quoted and ch in "([":
            depth += 1
        elif not quoted and ch in ")]":
            depth -= 1
        if ch == "," and depth == 0 and not quoted:
            out.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    out.append("".join(cur))
    return [p.strip() for p in out]


def parse_dfl(text: str) -> Theory:
    facts: list[ModalLiteral] = []
    rules: list[Rule] = []
    pairs: list[tuple[str, str]] = []
    seen: set[str] = set()
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            if line.startswith(">>"):
                facts.append(parse_literal(line[2:].strip(), fact=True))
                continue
            m = _RULE_LINE.match(line)
            if m:
                label = m["label"]
                if label in seen:
                    raise DflSyntaxError(f"duplicate rule label {label!r}", no)
                seen.add(label)
                body = m["body"]
                ante = tuple(parse_literal(p) for p in _split_body(body)) if body else ()
                head = tuple(parse_literal(p) for p in _CHAIN_SEP.split(m["head"].strip()))
                rules.append(Rule(label, _BY_ARROW[m["arrow"]], ante, head))
                continue
            m = _SUP_LINE.match(line)
            if m:
                pairs.append((m["w"], m["l"]))
                continue
            raise DflSyntaxError(f"unrecognised line {line!r}", no)
        except LiteralSyntaxError as exc:
            raise DflSyntaxError(str(exc), no) from exc
    return Theory(tuple(facts), tuple(rules), tuple(pairs))
