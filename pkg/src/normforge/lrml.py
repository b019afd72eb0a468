"""Typed model of the LegalRuleML subset and its parser.

The parser reads raw XML with expat (no namespace processing) so documents
that use ``lrml:``/``ruleml:`` prefixes without declaring them still load.
Elements outside the supported vocabulary are reported through
:class:`~normforge.errors.NormforgeWarning` and kept as opaque names.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Iterator
from xml.parsers import expat

from .core import Constant, RuleType, Term, Variable
from .errors import (
    DanglingReferenceError,
    DuplicateKeyError,
    LrmlParseError,
    NormforgeWarning,
    StructuralError,
)

LRML_NS = "http://docs.oasis-open.org/legalruleml/ns/v1.0/"
RULEML_NS = "http://ruleml.org/spec"


class NodeKind(str, enum.Enum):
    AND = "And"
    OR = "Or"
    SUBORDER_LIST = "SuborderList"
    ATOM = "Atom"
    NEG = "Neg"
    OBLIGATION = "Obligation"
    PERMISSION = "Permission"
    PROHIBITION = "Prohibition"
    RIGHT = "Right"
    VIOLATION = "Violation"
    COMPLIANCE = "Compliance"


DEONTIC_KINDS = frozenset(
    {NodeKind.OBLIGATION, NodeKind.PERMISSION, NodeKind.PROHIBITION, NodeKind.RIGHT}
)
REF_KINDS = frozenset({NodeKind.VIOLATION, NodeKind.COMPLIANCE})


class StatementKind(str, enum.Enum):
    CONSTITUTIVE = "Constitutive"
    PRESCRIPTIVE = "Prescriptive"
    FACTUAL = "Factual"
    OVERRIDE = "Override"
    PENALTY = "Penalty"
    REPARATION = "Reparation"


NORM_KINDS = frozenset({StatementKind.CONSTITUTIVE, StatementKind.PRESCRIPTIVE})


@dataclass(frozen=True)
class ConditionNode:
    kind: NodeKind
    children: tuple["ConditionNode", ...] = ()
    key: str | None = None
    keyref: str | None = None  # Violation/Compliance only
    predicate: str | None = None  # Atom only
    args: tuple[Term, ...] = ()
    bearer: str | None = None
    auxiliary: str | None = None
    target: str | None = None  # "literal" | "rule" once references are resolved
    line: int | None = field(default=None, compare=False)

    def walk(self) -> Iterator["ConditionNode"]:
        yield self
        for c in self.children:
            yield from c.walk()


@dataclass(frozen=True)
class RuleTemplate:
    key: str | None = None
    keyref: str | None = None
    closure: str | None = None
    strength: RuleType | None = None
    body: ConditionNode | None = None
    head: ConditionNode | None = None
    line: int | None = field(default=None, compare=False)

    @property
    def universal(self) -> bool:
        return self.closure == "universal"


@dataclass(frozen=True)
class OverridePair:
    over: str
    under: str


@dataclass(frozen=True)
class Reparation:
    key: str | None
    penalty: str
    statement: str


@dataclass(frozen=True)
class Statement:
    kind: StatementKind
    key: str
    rule: RuleTemplate | None = None
    atom: ConditionNode | None = None  # factual template
    overrides: tuple[OverridePair, ...] = ()
    penalty: ConditionNode | None = None  # SuborderList of a penalty statement
    reparations: tuple[Reparation, ...] = ()
    # annotations written by apply_associations
    strength: RuleType | None = None
    jurisdictions: frozenset[str] = frozenset()
    sources: tuple[str, ...] = ()
    line: int | None = field(default=None, compare=False)

    def nodes(self) -> Iterator[ConditionNode]:
        roots = [self.atom, self.penalty]
        if self.rule is not None:
            roots += [self.rule.body, self.rule.head]
        for root in roots:
            if root is not None:
                yield from root.walk()


@dataclass(frozen=True)
class Association:
    key: str | None
    modality: str | None = None  # appliesModality iri
    jurisdictions: tuple[str, ...] = ()
    sources: tuple[str, ...] = ()
    targets: tuple[str, ...] = ()


@dataclass(frozen=True)
class Jurisdiction:
    key: str
    same_as: str | None = None


@dataclass(frozen=True)
class LrmlDocument:
    statements: tuple[Statement, ...] = ()
    associations: tuple[Association, ...] = ()
    jurisdictions: tuple[Jurisdiction, ...] = ()
    extras: tuple[str, ...] = ()  # names of unsupported elements, kept opaque

    @property
    def overrides(self) -> list[OverridePair]:
        return [p for s in self.statements for p in s.overrides]

    @property
    def penalties(self) -> dict[str, ConditionNode]:
        return {s.key: s.penalty for s in self.statements
                if s.kind is StatementKind.PENALTY and s.penalty is not None}

    @property
    def reparations(self) -> list[Reparation]:
        return [r for s in self.statements for r in s.reparations]

    @cached_property
    def by_key(self) -> dict[str, Statement]:
        return {s.key: s for s in self.statements}

    @cached_property
    def by_rule_key(self) -> dict[str, Statement]:
        out: dict[str, Statement] = {}
        for s in self.statements:
            if s.rule is not None and s.rule.key is not None:
                out.setdefault(s.rule.key, s)
        return out

    @cached_property
    def node_index(self) -> dict[str, ConditionNode]:
        out: dict[str, ConditionNode] = {}
        for s in self.statements:
            for n in s.nodes():
                if n.key is not None:
                    out.setdefault(n.key, n)
        return out

    def statement(self, key: str) -> Statement:
        """Look a statement up by its own key or by the key of its rule template."""
        key = norm_key(key)
        if key in self.by_key:
            return self.by_key[key]
        if key in self.by_rule_key:
            return self.by_rule_key[key]
        raise DanglingReferenceError(key)

    def find_statement(self, key: str) -> Statement | None:
        try:
            return self.statement(key)
        except DanglingReferenceError:
            return None

    def jurisdiction_keys(self) -> list[str]:
        keys = [j.key for j in self.jurisdictions]
        for a in self.associations:
            keys.extend(k for k in a.jurisdictions if k not in keys)
        return keys


def norm_key(key: str) -> str:
    """``#ps3`` / ``:ps3`` / ``ps3`` all name the same element."""
    return key.strip().lstrip("#").lstrip(":")


# --------------------------------------------------------------------------
# raw XML tree


@dataclass
class _El:
    prefix: str | None
    local: str
    ns: str | None
    attrib: dict[str, str]
    line: int
    col: int
    children: list["_El"] = field(default_factory=list)
    text: str = ""

    @property
    def vocab(self) -> str | None:
        if self.ns == LRML_NS or (self.ns is None and self.prefix == "lrml"):
            return "lrml"
        if self.ns == RULEML_NS or (self.ns is None and self.prefix == "ruleml"):
            return "ruleml"
        return None

    def get(self, name: str) -> str | None:
        return self.attrib.get(name)

    def find(self, local: str) -> "_El | None":
        return next((c for c in self.children if c.local == local), None)


def _split_qname(name: str) -> tuple[str | None, str]:
    if ":" in name:
        prefix, local = name.split(":", 1)
        return prefix, local
    return None, name


def _build_tree(data: bytes | str) -> _El:
    parser = expat.ParserCreate()
    stack: list[_El] = []
    scopes: list[dict[str, str]] = [{}]
    root: list[_El] = []

    def start(name: str, attrs: dict[str, str]) -> None:
        scope = dict(scopes[-1])
        plain = {}
        for k, v in attrs.items():
            if k == "xmlns":
                scope[""] = v
            elif k.startswith("xmlns:"):
                scope[k[6:]] = v
            else:
                plain[_split_qname(k)[1]] = v
        scopes.append(scope)
        prefix, local = _split_qname(name)
        ns = scope.get(prefix if prefix is not None else "")
        el = _El(prefix, local, ns, plain, parser.CurrentLineNumber, parser.CurrentColumnNumber + 1)
        if stack:
            stack[-1].children.append(el)
        else:
            root.append(el)
        stack.append(el)

    def end(name: str) -> None:
        stack.pop()
        scopes.pop()

    def chars(text: str) -> None:
        if stack:
            stack[-1].text += text

    parser.StartElementHandler = start
    parser.EndElementHandler = end
    parser.CharacterDataHandler = chars
    try:
        if isinstance(data, str):
            data = data.encode("utf-8")
        parser.Parse(data, True)
    except expat.ExpatError as exc:
        raise LrmlParseError(expat.ErrorString(exc.code), exc.lineno, exc.offset + 1) from None
    if not root:
        raise LrmlParseError("document has no root element", 1, 1)
    return root[0]


# --------------------------------------------------------------------------
# element -> model


_STATEMENT_ELEMENTS = {f"{k.value}Statement": k for k in StatementKind}
_STRENGTH_WORDS = {t.value: t for t in RuleType}


def strength_from_iri(iri: str | None) -> RuleType | None:
    """``…/ruleStrength#defeater`` -> defeater; trailing digits are ignored."""
    if not iri:
        return None
    tail = iri.replace("/", "#").replace(":", "#").rsplit("#", 1)[-1]
    return _STRENGTH_WORDS.get(tail.rstrip("0123456789").lower())


def _iri_name(iri: str) -> str:
    return iri.replace("/", "#").rsplit("#", 1)[-1].rsplit(":", 1)[-1]


class _Reader:
    def __init__(self) -> None:
        self.extras: list[str] = []
        self._synth = 0

    def unknown(self, el: _El, where: str) -> None:
        name = f"{el.prefix}:{el.local}" if el.prefix else el.local
        self.extras.append(name)
        warnings.warn(f"unsupported element <{name}> in {where} (line {el.line}); ignored",
                      NormforgeWarning, stacklevel=4)

    def synth_key(self, stem: str) -> str:
        self._synth += 1
        return f"_{stem}{self._synth}"

    # -- documents ----------------------------------------------------------

    def document(self, root: _El) -> LrmlDocument:
        statements: list[Statement] = []
        associations: list[Association] = []
        jurisdictions: list[Jurisdiction] = []
        if root.local in _STATEMENT_ELEMENTS:
            children = [root]
        elif root.local == "LegalRuleML":
            children = root.children
        else:
            raise StructuralError(f"expected <LegalRuleML> root, found <{root.local}>", root.line)
        for el in children:
            if el.local == "Statements":
                for s in el.children:
                    if s.local in _STATEMENT_ELEMENTS:
                        statements.append(self.statement(s))
                    else:
                        self.unknown(s, "Statements")
            elif el.local in _STATEMENT_ELEMENTS:
                statements.append(self.statement(el))
            elif el.local == "Associations":
                for a in el.children:
                    if a.local == "Association":
                        associations.append(self.association(a))
                    else:
                        self.unknown(a, "Associations")
            elif el.local == "Association":
                associations.append(self.association(el))
            elif el.local == "Jurisdictions":
                for j in el.children:
                    if j.local == "Jurisdiction" and j.get("key"):
                        jurisdictions.append(Jurisdiction(norm_key(j.get("key")), j.get("sameAs")))
                    else:
                        self.unknown(j, "Jurisdictions")
            else:
                self.unknown(el, "LegalRuleML")
        seen: dict[str, Statement] = {}
        for s in statements:
            if s.key in seen:
                raise DuplicateKeyError(s.key, s.line)
            seen[s.key] = s
        seen_nodes: set[str] = set()
        for s in statements:
            for n in s.nodes():
                if n.key is None:
                    continue
                if n.key in seen_nodes:
                    warnings.warn(f"element key {n.key!r} reused (line {n.line}); first wins",
                                  NormforgeWarning, stacklevel=3)
                seen_nodes.add(n.key)
        return LrmlDocument(tuple(statements), tuple(associations), tuple(jurisdictions),
                            tuple(self.extras))

    def association(self, el: _El) -> Association:
        modality = None
        juris: list[str] = []
        sources: list[str] = []
        targets: list[str] = []
        for c in el.children:
            if c.local == "appliesModality":
                modality = c.get("iri")
            elif c.local == "appliesJurisdiction" and c.get("keyref"):
                juris.append(norm_key(c.get("keyref")))
            elif c.local == "appliesSource" and c.get("keyref"):
                sources.append(norm_key(c.get("keyref")))
            elif c.local in ("toTarget", "toTag") and c.get("keyref"):
                targets.append(norm_key(c.get("keyref")))
            else:
                self.unknown(c, "Association")
        key = norm_key(el.get("key")) if el.get("key") else None
        return Association(key, modality, tuple(juris), tuple(sources), tuple(targets))

    # -- statements -----------------------------------------------------------

    def statement(self, el: _El) -> Statement:
        kind = _STATEMENT_ELEMENTS[el.local]
        raw_key = el.get("key")
        key = norm_key(raw_key) if raw_key else self.synth_key(kind.value.lower())
        if kind in NORM_KINDS:
            rule_el = el.find("Rule")
            if rule_el is None:
                raise StructuralError(f"{el.local} {key!r} has no <Rule>", el.line)
            strength = None
            for c in el.children:
                if c.local == "hasStrength":
                    strength = self.strength(c)
                elif c.local != "Rule":
                    self.unknown(c, el.local)
            rule = self.rule(rule_el)
            if strength is not None and rule.strength is None:
                rule = replace(rule, strength=strength)
            return Statement(kind, key, rule=rule, line=el.line)
        if kind is StatementKind.FACTUAL:
            atom = None
            for c in el.children:
                if c.local == "hasTemplate":
                    formulas = [g for g in c.children]
                    if any(g.local == "Rule" for g in formulas):
                        raise StructuralError(f"factual statement {key!r} contains a rule", c.line)
                    nodes = [n for n in (self.formula(g, "fact") for g in formulas) if n is not None]
                    if len(nodes) != 1:
                        raise StructuralError(
                            f"factual statement {key!r} must hold exactly one formula", c.line)
                    atom = nodes[0]
                elif c.local == "Rule":
                    raise StructuralError(f"factual statement {key!r} contains a rule", c.line)
                else:
                    self.unknown(c, el.local)
            if atom is None:
                raise StructuralError(f"factual statement {key!r} has no <hasTemplate>", el.line)
            return Statement(kind, key, atom=atom, line=el.line)
        if kind is StatementKind.OVERRIDE:
            pairs = []
            for c in el.children:
                if c.local == "Override" and c.get("over") and c.get("under"):
                    pairs.append(OverridePair(norm_key(c.get("over")), norm_key(c.get("under"))))
                elif c.local == "Override":
                    raise StructuralError("<Override> needs both 'over' and 'under'", c.line)
                else:
                    self.unknown(c, el.local)
            return Statement(kind, key, overrides=tuple(pairs), line=el.line)
        if kind is StatementKind.PENALTY:
            lst = el.find("SuborderList")
            if lst is None:
                raise StructuralError(f"penalty statement {key!r} has no <SuborderList>", el.line)
            return Statement(kind, key, penalty=self.formula(lst, "head"), line=el.line)
        # reparation
        reps = []
        for c in el.children:
            if c.local != "Reparation":
                self.unknown(c, el.local)
                continue
            pen = c.find("appliesPenalty")
            tgt = c.find("toPrescriptiveStatement")
            if pen is None or tgt is None or not pen.get("keyref") or not tgt.get("keyref"):
                raise StructuralError(
                    "<Reparation> needs <appliesPenalty> and <toPrescriptiveStatement> keyrefs", c.line)
            rkey = norm_key(c.get("key")) if c.get("key") else None
            reps.append(Reparation(rkey, norm_key(pen.get("keyref")), norm_key(tgt.get("keyref"))))
        return Statement(kind, key, reparations=tuple(reps), line=el.line)

    def strength(self, el: _El) -> RuleType | None:
        for c in el.children:
            by_iri = strength_from_iri(c.get("iri"))
            if by_iri is not None:
                return by_iri
            word = c.local.replace("Strength", "").lower()
            if word in _STRENGTH_WORDS:
                return _STRENGTH_WORDS[word]
            warnings.warn(f"unrecognised strength element <{c.local}> (line {c.line})",
                          NormforgeWarning, stacklevel=4)
        return None

    def rule(self, el: _El) -> RuleTemplate:
        body = head = strength = None
        for c in el.children:
            if c.local == "if":
                body = self._part(c, "body")
            elif c.local == "then":
                head = self._part(c, "head")
            elif c.local == "hasStrength":
                strength = self.strength(c)
            else:
                self.unknown(c, "Rule")
        return RuleTemplate(
            key=norm_key(el.get("key")) if el.get("key") else None,
            keyref=norm_key(el.get("keyref")) if el.get("keyref") else None,
            closure=el.get("closure"),
            strength=strength,
            body=body,
            head=head,
            line=el.line,
        )

    def _part(self, el: _El, ctx: str) -> ConditionNode | None:
        nodes = [n for n in (self.formula(c, ctx) for c in el.children) if n is not None]
        if not nodes:
            return None
        if len(nodes) == 1:
            return nodes[0]
        return ConditionNode(NodeKind.AND, tuple(nodes), line=el.line)

    # -- formulas -------------------------------------------------------------

    def formula(self, el: _El, ctx: str) -> ConditionNode | None:
        local = el.local
        key = norm_key(el.get("key")) if el.get("key") else None
        if local in ("And", "Or"):
            kids = tuple(n for n in (self.formula(c, ctx) for c in el.children) if n is not None)
            return ConditionNode(NodeKind(local), kids, key=key, line=el.line)
        if local == "SuborderList":
            if ctx != "head":
                raise StructuralError(f"<SuborderList> is not allowed in a rule {ctx}", el.line)
            kids = tuple(n for n in (self.formula(c, ctx) for c in el.children) if n is not None)
            return ConditionNode(NodeKind.SUBORDER_LIST, kids, key=key, line=el.line)
        if local == "Atom":
            return self.atom(el, key)
        if local == "Neg":
            kids = tuple(n for n in (self.formula(c, ctx) for c in el.children) if n is not None)
            return ConditionNode(NodeKind.NEG, kids, key=key, line=el.line)
        if local in ("Obligation", "Permission", "Prohibition") or (
            local == "Right" and el.vocab != "ruleml"
        ):
            bearer = aux = None
            kids = []
            for c in el.children:
                if c.local == "slot":
                    role, value = self.slot(c)
                    if role == "Bearer":
                        bearer = value
                    elif role == "AuxiliaryParty":
                        aux = value
                    else:
                        self.unknown(c, local)
                else:
                    n = self.formula(c, ctx)
                    if n is not None:
                        kids.append(n)
            return ConditionNode(NodeKind(local), tuple(kids), key=key, bearer=bearer,
                                 auxiliary=aux, line=el.line)
        if local in ("Violation", "Compliance"):
            ref = el.get("keyref")
            if not ref:
                raise StructuralError(f"<{local}> needs a keyref", el.line)
            return ConditionNode(NodeKind(local), key=key, keyref=norm_key(ref), line=el.line)
        if local == "Rule":
            raise StructuralError(f"<Rule> nested inside a formula", el.line)
        self.unknown(el, "formula")
        return None

    def slot(self, el: _El) -> tuple[str | None, str | None]:
        role = value = None
        for c in el.children:
            if c.local in ("Bearer", "AuxiliaryParty"):
                role = c.local
            elif c.local in ("Var", "Ind"):
                value = (c.text.strip() or _iri_name(c.get("iri") or "")) or None
        return role, value

    def atom(self, el: _El, key: str | None) -> ConditionNode:
        pred = None
        args: list[Term] = []
        for c in el.children:
            if c.local == "Rel":
                pred = _iri_name(c.get("iri")) if c.get("iri") else c.text.strip()
            elif c.local == "Var":
                args.append(Variable(c.text.strip()))
            elif c.local in ("Ind", "Data"):
                name = c.text.strip() or _iri_name(c.get("iri") or "")
                args.append(Constant(name))
            else:
                self.unknown(c, "Atom")
        if not pred:
            raise StructuralError("<Atom> without a <Rel>", el.line)
        return ConditionNode(NodeKind.ATOM, key=key, predicate=pred, args=tuple(args), line=el.line)


def parse_document(data: bytes | str) -> LrmlDocument:
    """Parse LegalRuleML XML text into an :class:`LrmlDocument`."""
    return _Reader().document(_build_tree(data))


# --------------------------------------------------------------------------
# reference resolution and associations


def _resolve_template(doc: LrmlDocument, s: Statement, seen: tuple[str, ...] = ()) -> RuleTemplate:
    rule = s.rule
    if rule is None or rule.keyref is None:
        return rule
    if rule.keyref in seen:
        raise DanglingReferenceError(rule.keyref, f"cyclic rule template reference via {rule.keyref!r}")
    base_stmt = doc.by_rule_key.get(rule.keyref) or doc.by_key.get(rule.keyref)
    if base_stmt is None or base_stmt.rule is None:
        raise DanglingReferenceError(rule.keyref)
    base = _resolve_template(doc, base_stmt, seen + (rule.keyref,))
    return replace(
        rule,
        body=rule.body if rule.body is not None else base.body,
        head=rule.head if rule.head is not None else base.head,
        strength=rule.strength if rule.strength is not None else base.strength,
        closure=rule.closure if rule.closure is not None else base.closure,
    )


def _ref_target(doc: LrmlDocument, key: str) -> str:
    stmt = doc.by_key.get(key) or doc.by_rule_key.get(key)
    if stmt is not None and stmt.kind in NORM_KINDS:
        return "rule"
    if stmt is not None and stmt.kind is StatementKind.FACTUAL:
        return "literal"
    node = doc.node_index.get(key)
    if node is not None and (node.kind in DEONTIC_KINDS or node.kind in (NodeKind.ATOM, NodeKind.NEG)):
        return "literal"
    raise DanglingReferenceError(key)


def _annotate(doc: LrmlDocument, node: ConditionNode | None) -> ConditionNode | None:
    if node is None:
        return None
    if node.kind in REF_KINDS:
        return replace(node, target=_ref_target(doc, node.keyref))
    if not node.children:
        return node
    return replace(node, children=tuple(_annotate(doc, c) for c in node.children))


def resolve_keyrefs(doc: LrmlDocument) -> LrmlDocument:
    """Inline referenced rule templates and classify Violation/Compliance targets.

    Association targets and ``appliesSource`` references are metadata and are
    checked later, by :func:`apply_associations`.
    """
    out = []
    for s in doc.statements:
        if s.rule is not None:
            rule = _resolve_template(doc, s)
            s = replace(s, rule=replace(rule, body=_annotate(doc, rule.body),
                                        head=_annotate(doc, rule.head)))
        if s.penalty is not None:
            s = replace(s, penalty=_annotate(doc, s.penalty))
        for pair in s.overrides:
            doc.statement(pair.over)
            doc.statement(pair.under)
        for rep in s.reparations:
            pen = doc.by_key.get(rep.penalty)
            if pen is None or pen.kind is not StatementKind.PENALTY:
                raise DanglingReferenceError(rep.penalty, f"reparation names unknown penalty {rep.penalty!r}")
            doc.statement(rep.statement)
        out.append(s)
    return replace(doc, statements=tuple(out))


def apply_associations(doc: LrmlDocument, jurisdiction: str | None = None) -> LrmlDocument:
    """Write association strength/jurisdiction/source onto target statements.

    Associations apply in document order; a later one overrides an earlier one
    for the same target. A strength tied to jurisdictions only takes effect when
    ``jurisdiction`` is one of them.
    """
    updated = {s.key: s for s in doc.statements}
    for asn in doc.associations:
        strength = None
        if asn.modality is not None:
            strength = strength_from_iri(asn.modality)
            if strength is None:
                warnings.warn(
                    f"association {asn.key!r}: modality {asn.modality!r} is not a rule strength; "
                    "default strength kept", NormforgeWarning, stacklevel=2)
        for j in asn.jurisdictions:
            if doc.jurisdictions and j not in {x.key for x in doc.jurisdictions}:
                warnings.warn(f"association {asn.key!r} names undeclared jurisdiction {j!r}",
                              NormforgeWarning, stacklevel=2)
        if not asn.targets:
            warnings.warn(f"association {asn.key!r} has no target", NormforgeWarning, stacklevel=2)
        for target in asn.targets:
            stmt = doc.find_statement(target)
            if stmt is None:
                warnings.warn(f"association {asn.key!r}: target {target!r} is not a statement; ignored",
                              NormforgeWarning, stacklevel=2)
                continue
            cur = updated[stmt.key]
            changes = {}
            if strength is not None and (not asn.jurisdictions or jurisdiction in asn.jurisdictions):
                changes["strength"] = strength
            if asn.jurisdictions:
                changes["jurisdictions"] = frozenset(asn.jurisdictions)
            if asn.sources:
                changes["sources"] = tuple(asn.sources)
            updated[stmt.key] = replace(cur, **changes)
    return replace(doc, statements=tuple(updated[s.key] for s in doc.statements))
