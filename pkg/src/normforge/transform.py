"""Compile a LegalRuleML document into a modal defeasible theory.

Pipeline (see :func:`transform`)::

    resolve_keyrefs -> apply_associations -> [filter_jurisdiction]
      -> statements to rules / facts / superiority -> attach_penalties
      -> [reduct] -> [verify_rule_generation -> verify_body] -> validate

Generated labels use ``-N`` / ``-Na`` for Or/And splits and ``!`` for labels
invented by the rewrites (``r!1`` for chain expansion, ``r!inf+`` and friends
for rule-status checks); ``!`` never appears in document keys.
"""

from __future__ import annotations

import itertools
import re
import string
import warnings
from dataclasses import dataclass, replace
from typing import Mapping, Sequence, Union

from .core import (
    Atom,
    CondRef,
    Constant,
    Modality,
    ModalLiteral,
    Rule,
    RuleType,
    Tag,
    Theory,
    complement,
    comply_set,
    format_literal,
    normalize_chain,
    validate_theory,
    violate_set,
)
from .errors import (
    ConstraintViolation,
    DanglingReferenceError,
    LabelOverflowError,
    MalformedHeadError,
    NormforgeError,
    NormforgeWarning,
    ReferenceTypeError,
    StructuralError,
    TransformError,
    UnknownJurisdictionError,
)
from .lrml import (
    DEONTIC_KINDS,
    NORM_KINDS,
    REF_KINDS,
    ConditionNode,
    LrmlDocument,
    NodeKind,
    Statement,
    StatementKind,
    apply_associations,
    resolve_keyrefs,
)

__all__ = [
    "TransformOptions", "SubruleName", "map_modality", "node_literal", "flatten_body",
    "split_head", "subrule_labels", "statement_to_rules", "factual_to_fact",
    "override_to_superiority", "attach_penalties", "reduct", "verify_rule_generation",
    "verify_body", "filter_jurisdiction", "transform",
]

_DEONTIC_TAGS = {
    NodeKind.OBLIGATION: Tag.OBL,
    NodeKind.PERMISSION: Tag.PER,
    NodeKind.PROHIBITION: Tag.PRO,
    NodeKind.RIGHT: Tag.RIGHT,
}


@dataclass(frozen=True)
class TransformOptions:
    jurisdiction: str | None = None
    apply_reduct: bool = True
    apply_verify_rules: bool = True


@dataclass(frozen=True)
class SubruleName:
    base: str
    or_index: int | None = None
    and_letter: str | None = None

    _PATTERN = re.compile(r"(?P<base>.+?)(?:-(?P<n>[1-9]\d*)(?P<c>[a-z])?)?\Z")

    def __str__(self) -> str:
        if self.or_index is None:
            return self.base
        return f"{self.base}-{self.or_index}{self.and_letter or ''}"

    @classmethod
    def parse(cls, text: str) -> "SubruleName":
        m = cls._PATTERN.match(text)
        n = int(m["n"]) if m["n"] else None
        return cls(m["base"], n, m["c"])


# --------------------------------------------------------------------------
# literals


def _plain_literal(node: ConditionNode) -> ModalLiteral:
    if node.kind is NodeKind.ATOM:
        return ModalLiteral(Atom(node.predicate, node.args))
    if node.kind is NodeKind.NEG:
        if len(node.children) != 1 or node.children[0].kind is not NodeKind.ATOM:
            raise StructuralError("<Neg> must wrap exactly one <Atom>", node.line)
        return complement(_plain_literal(node.children[0]))
    raise StructuralError(f"expected an atom, found <{node.kind.value}>", node.line)


def map_modality(node: ConditionNode) -> ModalLiteral:
    """Deontic element -> modal literal with ``[TAG:bearer:aux]`` slots."""
    if node.kind not in DEONTIC_KINDS:
        raise StructuralError(f"<{node.kind.value}> is not a deontic element", node.line)
    if len(node.children) != 1:
        raise StructuralError(
            f"<{node.kind.value}> must wrap exactly one atom, found {len(node.children)}", node.line)
    inner = _plain_literal(node.children[0])
    return inner.with_modality(Modality(_DEONTIC_TAGS[node.kind], node.bearer, node.auxiliary))


def node_literal(node: ConditionNode) -> ModalLiteral:
    if node.kind in DEONTIC_KINDS:
        return map_modality(node)
    return _plain_literal(node)


def _target_literal(doc: LrmlDocument, key: str) -> ModalLiteral:
    stmt = doc.by_key.get(key)
    if stmt is not None and stmt.kind is StatementKind.FACTUAL:
        return node_literal(stmt.atom)
    node = doc.node_index.get(key)
    if node is None:
        raise DanglingReferenceError(key)
    return node_literal(node)


def _target_kind(doc: LrmlDocument | None, node: ConditionNode) -> str:
    if node.target is not None or doc is None:
        return node.target or "rule"
    stmt = doc.find_statement(node.keyref)
    return "rule" if stmt is not None and stmt.kind in NORM_KINDS else "literal"


def _cond_ref(doc: LrmlDocument | None, node: ConditionNode) -> CondRef:
    kind = "violation" if node.kind is NodeKind.VIOLATION else "compliance"
    if _target_kind(doc, node) == "literal":
        if doc is None:
            raise DanglingReferenceError(node.keyref, "literal reference needs the document")
        return CondRef(kind, node.keyref, _target_literal(doc, node.keyref))
    stmt = doc.find_statement(node.keyref) if doc is not None else None
    return CondRef(kind, stmt.key if stmt is not None else node.keyref)


# --------------------------------------------------------------------------
# bodies and heads

BodyItem = Union[ModalLiteral, ConditionNode]


def flatten_body(body: ConditionNode | None) -> list[tuple[BodyItem, ...]]:
    """Disjunctive normal form of a rule body, one antecedent per Or-branch combination.

    Violation/Compliance elements are kept as nodes for the caller to expand.
    """
    if body is None:
        return [()]
    kind = body.kind
    if kind is NodeKind.SUBORDER_LIST:
        raise StructuralError("<SuborderList> is not allowed in a rule body", body.line)
    if kind is NodeKind.AND:
        out: list[tuple[BodyItem, ...]] = [()]
        for child in body.children:
            out = [a + b for a in out for b in flatten_body(child)]
        return [tuple(dict.fromkeys(branch)) for branch in out]
    if kind is NodeKind.OR:
        if not body.children:
            raise StructuralError("empty <Or>", body.line)
        return [branch for child in body.children for branch in flatten_body(child)]
    if kind in REF_KINDS:
        return [(body,)]
    return [(node_literal(body),)]


HeadItem = tuple[ModalLiteral, tuple[ConditionNode, ...]]


def _head_alternatives(node: ConditionNode) -> list[HeadItem]:
    if node.kind is NodeKind.AND:
        refs = tuple(c for c in node.children if c.kind in REF_KINDS)
        parts = [c for c in node.children if c.kind not in REF_KINDS]
        if not parts:
            raise MalformedHeadError(
                "head <And> holds only Violation/Compliance elements; no head literal", node.line)
        return [(lit, attached + refs) for c in parts for lit, attached in _head_alternatives(c)]
    if node.kind is NodeKind.OR:
        raise StructuralError("<Or> in a rule head is not supported", node.line)
    if node.kind is NodeKind.SUBORDER_LIST:
        raise StructuralError("nested <SuborderList> in a rule head", node.line)
    if node.kind in REF_KINDS:
        raise MalformedHeadError(
            f"<{node.kind.value}> cannot stand alone in a rule head; no head literal", node.line)
    return [(node_literal(node), ())]


def _contract(chain: Sequence[HeadItem]) -> tuple[HeadItem, ...]:
    seen: dict[ModalLiteral, HeadItem] = {}
    for lit, refs in chain:
        seen.setdefault(lit, (lit, refs))
    return tuple(seen.values())


def _split_head(head: ConditionNode | None) -> list[tuple[HeadItem, ...]]:
    if head is None:
        raise MalformedHeadError("rule has no head")
    if head.kind is NodeKind.SUBORDER_LIST:
        if not head.children:
            raise MalformedHeadError("empty <SuborderList> head", head.line)
        chains: list[tuple[HeadItem, ...]] = [()]
        for child in head.children:
            alts = _head_alternatives(child)
            chains = [c + (a,) for c in chains for a in alts]
    else:
        chains = [(a,) for a in _head_alternatives(head)]
    return [_contract(c) for c in chains]


def split_head(head: ConditionNode | None) -> list[tuple[ModalLiteral, ...]]:
    """One reparation chain per And-alternative; SuborderList items become chain items."""
    return [tuple(lit for lit, _ in chain) for chain in _split_head(head)]


def subrule_labels(base: str, n_or: int, n_and: int) -> list[SubruleName]:
    if n_or < 1 or n_and < 1:
        raise ValueError("split counts must be positive")
    if n_or == 1 and n_and == 1:
        return [SubruleName(base)]
    if n_or == 1 or n_and == 1:
        return [SubruleName(base, i) for i in range(1, max(n_or, n_and) + 1)]
    if n_and > len(string.ascii_lowercase):
        raise LabelOverflowError(f"{base}: {n_and} head splits exceed the a-z label alphabet")
    return [SubruleName(base, i, c)
            for i in range(1, n_or + 1) for c in string.ascii_lowercase[:n_and]]


# --------------------------------------------------------------------------
# statements


def _rule_type(s: Statement) -> RuleType:
    if s.strength is not None:
        return s.strength
    if s.rule is not None and s.rule.strength is not None:
        return s.rule.strength
    return RuleType.STRICT if s.kind is StatementKind.CONSTITUTIVE else RuleType.DEFEASIBLE


def statement_to_rules(s: Statement, doc: LrmlDocument | None = None) -> list[Rule]:
    """Constitutive/prescriptive statement -> one rule per Or-branch and And-alternative.

    Violation/Compliance elements that point at literals are expanded in place;
    those pointing at norms are carried on the rule for :func:`verify_body`.
    """
    if s.kind not in NORM_KINDS:
        raise ReferenceTypeError(f"statement {s.key!r} is {s.kind.value}, not a norm")
    template = s.rule
    if template is None:
        raise StructuralError(f"statement {s.key!r} has no rule", s.line)
    rtype = _rule_type(s)
    branches = flatten_body(template.body)
    chains = _split_head(template.head)
    if s.kind is StatementKind.CONSTITUTIVE:
        for chain in chains:
            for lit, _ in chain:
                if lit.tag is not Tag.NONE:
                    raise ConstraintViolation(
                        f"constitutive statement {s.key!r} has a deontic head {format_literal(lit)}")
    if rtype is not RuleType.DEFEASIBLE and any(len(c) > 1 for c in chains):
        raise ConstraintViolation(
            f"{rtype.value} statement {s.key!r} has a reparation chain; only defeasible rules may")
    split = len(branches) > 1 or len(chains) > 1
    base = (template.keyref or template.key or s.key) if split else s.key
    labels = subrule_labels(base, len(branches), len(chains))
    out: list[Rule] = []
    names = iter(labels)
    for branch in branches:
        ante: list[ModalLiteral] = []
        expanded: list[ModalLiteral] = []
        body_refs: list[CondRef] = []
        for item in branch:
            if isinstance(item, ModalLiteral):
                ante.append(item)
                continue
            ref = _cond_ref(doc, item)
            if ref.literal is not None:
                # appended after the plain conditions, as the conditions they test
                expand = violate_set if ref.kind == "violation" else comply_set
                expanded.extend(expand(ref.literal))
            else:
                body_refs.append(ref)
        ante.extend(expanded)
        for chain in chains:
            head = tuple(lit for lit, _ in chain)
            head_refs = tuple(tuple(_cond_ref(doc, n) for n in refs) for _, refs in chain)
            out.append(Rule(str(next(names)), rtype, tuple(ante), head, tuple(body_refs), head_refs))
    return out


def factual_to_fact(s: Statement) -> ModalLiteral:
    if s.kind is not StatementKind.FACTUAL:
        raise ReferenceTypeError(f"statement {s.key!r} is {s.kind.value}, not factual")
    if s.rule is not None:
        raise StructuralError(f"factual statement {s.key!r} contains a rule", s.line)
    if s.atom is None:
        raise StructuralError(f"factual statement {s.key!r} has no template", s.line)
    return node_literal(s.atom)


def override_to_superiority(
    s: Statement,
    doc: LrmlDocument | None = None,
    labels: Mapping[str, Sequence[str]] | None = None,
) -> list[tuple[str, str]]:
    """Override pairs -> superiority pairs, expanded over sub-rule labels."""
    if s.kind is not StatementKind.OVERRIDE:
        raise ReferenceTypeError(f"statement {s.key!r} is not an override statement")
    labels = labels or {}
    out: list[tuple[str, str]] = []
    for pair in s.overrides:
        sides = []
        for key in (pair.over, pair.under):
            target = doc.statement(key) if doc is not None else None
            if target is not None and target.kind not in NORM_KINDS:
                raise ReferenceTypeError(
                    f"override references {target.kind.value} statement {target.key!r}; "
                    "only norms have rule labels")
            resolved = target.key if target is not None else key
            sides.append(list(labels.get(resolved, [resolved])))
        out.extend(itertools.product(sides[0], sides[1]))
    return out


def _normalized_head(items: Sequence[HeadItem]) -> tuple[tuple[ModalLiteral, ...], tuple]:
    contracted = _contract(items)
    return tuple(l for l, _ in contracted), tuple(r for _, r in contracted)


def attach_penalties(
    doc: LrmlDocument, rules_by_key: Mapping[str, list[Rule]]
) -> dict[str, list[Rule]]:
    """Append each reparation's penalty list to the head chain of the repaired norm."""
    out = {k: list(v) for k, v in rules_by_key.items()}
    for rep in doc.reparations:
        target = doc.statement(rep.statement)
        if target.kind is StatementKind.CONSTITUTIVE:
            raise ConstraintViolation(
                f"reparation targets constitutive statement {target.key!r}; strict rules cannot carry chains")
        if target.kind not in NORM_KINDS:
            raise ReferenceTypeError(f"reparation targets {target.kind.value} statement {target.key!r}")
        penalty = doc.penalties.get(rep.penalty)
        if penalty is None:
            raise DanglingReferenceError(rep.penalty)
        if not penalty.children:
            continue
        chains = _split_head(penalty)
        if len(chains) != 1:
            raise StructuralError(f"penalty {rep.penalty!r} must describe a single chain", penalty.line)
        extra = [(lit, tuple(_cond_ref(doc, n) for n in refs)) for lit, refs in chains[0]]
        updated = []
        for rule in out.get(target.key, []):
            if rule.rtype is not RuleType.DEFEASIBLE:
                raise ConstraintViolation(
                    f"reparation targets {rule.rtype.value} rule {rule.label!r}; only defeasible rules carry chains")
            items = [(lit, rule.refs_at(i)) for i, lit in enumerate(rule.head)] + extra
            head, head_refs = _normalized_head(items)
            updated.append(replace(rule, head=head, head_refs=head_refs))
        out[target.key] = updated
    return out


# --------------------------------------------------------------------------
# theory rewrites


def _expand_chain(rule: Rule) -> list[Rule]:
    out = []
    ante = rule.antecedent
    last = len(rule.head) - 1
    for i, item in enumerate(rule.head):
        label = rule.label if i == 0 else f"{rule.label}!{i}"
        out.append(Rule(label, rule.rtype, ante, (item,), rule.body_refs, (rule.refs_at(i),)))
        if i < last:
            ante = ante + violate_set(item)
    return out


def reduct(theory: Theory) -> Theory:
    """Expand every reparation chain into single-headed rules.

    ``r: A => c1 (x) c2 (x) c3`` becomes ``r: A => c1``,
    ``r!1: A, violate(c1) => c2`` and ``r!2: A, violate(c1), violate(c2) => c3``;
    every superiority pair is inherited by all pieces of both rules.
    """
    rules: list[Rule] = []
    pieces: dict[str, list[str]] = {}
    for rule in theory.rules:
        expanded = _expand_chain(rule) if rule.rtype is RuleType.DEFEASIBLE and len(rule.head) > 1 else [rule]
        rules.extend(expanded)
        pieces[rule.label] = [r.label for r in expanded]
    pairs = [
        (w, l)
        for winner, loser in theory.superiority
        for w in pieces.get(winner, [winner])
        for l in pieces.get(loser, [loser])
    ]
    return Theory(theory.facts, tuple(rules), tuple(pairs))


def verify_rule_generation(theory: Theory) -> Theory:
    """Add verify(p) to rules whose head literal carries a Violation/Compliance element.

    Literal references expand to the violation/compliance literal sets; norm
    references move to the body for :func:`verify_body`.
    """
    rules = []
    for rule in theory.rules:
        if not rule.head_refs:
            rules.append(rule)
            continue
        if rule.rtype is RuleType.STRICT:
            raise ConstraintViolation(
                f"strict rule {rule.label!r} has a Violation/Compliance element attached to its head")
        if rule.rtype is RuleType.DEFEATER:
            warnings.warn(f"defeater {rule.label!r}: attached Violation/Compliance element ignored",
                          NormforgeWarning, stacklevel=2)
            rules.append(replace(rule, head_refs=()))
            continue
        if any(rule.head_refs[1:]):
            warnings.warn(
                f"rule {rule.label!r}: conditions attached to later chain items need the reduct; ignored",
                NormforgeWarning, stacklevel=2)
        ante = list(rule.antecedent)
        body_refs = list(rule.body_refs)
        for ref in rule.head_refs[0]:
            if ref.literal is None:
                body_refs.append(ref)
            else:
                expand = violate_set if ref.kind == "violation" else comply_set
                ante.extend(expand(ref.literal))
        rules.append(replace(rule, antecedent=tuple(ante), body_refs=tuple(body_refs), head_refs=()))
    return Theory(theory.facts, tuple(rules), theory.superiority)


def _fresh(name: str, used: set[str]) -> str:
    while name in used:
        name += "_"
    used.add(name)
    return name


def verify_body(theory: Theory, targets: Mapping[str, Sequence[str]] | None = None) -> Theory:
    """Replace norm-targeted Violation/Compliance elements with rule-status atoms.

    For every referenced norm ``rc`` five rules decide whether it is in force
    (``inf(rc)``) and whether its first head literal was complied with or
    violated; the referring rule then simply requires ``violation(rc)`` or
    ``compliance(rc)``. ``targets`` maps a reference key to the labels of the
    rules compiled from it (default: the key itself).
    """
    keys = list(dict.fromkeys(ref.key for r in theory.rules for ref in r.body_refs if ref.targets_rule))
    if not keys:
        return theory
    targets = targets or {}
    used = set(theory.predicates())
    inf_p, viol_p, comp_p = (_fresh(n, used) for n in ("inf", "violation", "compliance"))

    def status(pred: str, key: str) -> ModalLiteral:
        return ModalLiteral(Atom(pred, (Constant(key),)))

    rewritten = []
    for rule in theory.rules:
        if not rule.body_refs:
            rewritten.append(rule)
            continue
        extra = tuple(status(viol_p if ref.kind == "violation" else comp_p, ref.key)
                      for ref in rule.body_refs if ref.targets_rule)
        keep = tuple(ref for ref in rule.body_refs if not ref.targets_rule)
        rewritten.append(replace(rule, antecedent=rule.antecedent + extra, body_refs=keep))
    by_label = {r.label: r for r in rewritten}

    aux: list[Rule] = []
    pairs: list[tuple[str, str]] = []
    for key in keys:
        labels = list(targets.get(key, [key]))
        missing = [lab for lab in labels if lab not in by_label]
        if missing or not labels:
            raise DanglingReferenceError(key, f"Violation/Compliance refers to unknown rule {key!r}")
        inf = status(inf_p, key)
        first = by_label[labels[0]].head[0]
        for lab in labels:
            aux.append(Rule(f"{lab}!inf+", RuleType.DEFEASIBLE, by_label[lab].antecedent, (inf,)))
            pairs.append((f"{lab}!inf+", f"{key}!inf-"))
        aux.append(Rule(f"{key}!inf-", RuleType.DEFEASIBLE, (), (complement(inf),)))
        aux.append(Rule(f"{key}!viol-", RuleType.DEFEASIBLE, (complement(inf),), (status(viol_p, key),)))
        aux.append(Rule(f"{key}!comp+", RuleType.DEFEASIBLE, (inf, *comply_set(first)), (status(comp_p, key),)))
        aux.append(Rule(f"{key}!viol+", RuleType.DEFEASIBLE, (inf, *violate_set(first)), (status(viol_p, key),)))
    return Theory(theory.facts, tuple(rewritten) + tuple(aux), theory.superiority + tuple(pairs))


# --------------------------------------------------------------------------
# jurisdiction


def filter_jurisdiction(doc: LrmlDocument, jurisdiction: str) -> LrmlDocument:
    """Sub-document for one jurisdiction: its norms, universal-closure norms and
    the facts, overrides and reparations whose targets all survive."""
    known = doc.jurisdiction_keys()
    if jurisdiction not in known:
        raise UnknownJurisdictionError(jurisdiction, known)
    kept: set[str] = set()
    for s in doc.statements:
        if s.kind in NORM_KINDS:
            universal = s.rule is not None and s.rule.universal
            if jurisdiction in s.jurisdictions or universal:
                kept.add(s.key)
        elif s.kind is StatementKind.FACTUAL:
            if not s.jurisdictions or jurisdiction in s.jurisdictions:
                kept.add(s.key)
    if not any(doc.by_key[k].kind in NORM_KINDS for k in kept):
        warnings.warn(f"no norm applies in jurisdiction {jurisdiction!r}", NormforgeWarning, stacklevel=2)

    def survives(key: str) -> bool:
        target = doc.find_statement(key)
        return target is not None and target.key in kept

    out: list[Statement] = []
    used_penalties: set[str] = set()
    for s in doc.statements:
        if s.key in kept:
            out.append(s)
        elif s.kind is StatementKind.OVERRIDE:
            pairs = tuple(p for p in s.overrides if survives(p.over) and survives(p.under))
            if pairs:
                out.append(replace(s, overrides=pairs))
        elif s.kind is StatementKind.REPARATION:
            reps = tuple(r for r in s.reparations if survives(r.statement))
            if reps:
                out.append(replace(s, reparations=reps))
                used_penalties.update(r.penalty for r in reps)
    penalties = [s for s in doc.statements if s.kind is StatementKind.PENALTY and s.key in used_penalties]
    order = {s.key: i for i, s in enumerate(doc.statements)}
    statements = sorted(out + penalties, key=lambda s: order[s.key])
    associations = tuple(
        replace(a, targets=tuple(t for t in a.targets if survives(t)))
        for a in doc.associations
        if any(survives(t) for t in a.targets)
    )
    return replace(doc, statements=tuple(statements), associations=associations)


# --------------------------------------------------------------------------
# pipeline


def transform(doc: LrmlDocument, options: TransformOptions | None = None) -> Theory:
    """Compile ``doc`` into a defeasible theory.

    Recoverable problems are reported as :class:`NormforgeWarning`; failures are
    collected per statement and raised together as :class:`TransformError`.
    """
    opts = options or TransformOptions()
    doc = apply_associations(resolve_keyrefs(doc), opts.jurisdiction)
    if opts.jurisdiction is not None:
        doc = filter_jurisdiction(doc, opts.jurisdiction)

    failures: list[tuple[str, Exception]] = []
    rules_by_key: dict[str, list[Rule]] = {}
    facts: list[ModalLiteral] = []
    for s in doc.statements:
        try:
            if s.kind in NORM_KINDS:
                rules_by_key[s.key] = statement_to_rules(s, doc)
            elif s.kind is StatementKind.FACTUAL:
                facts.append(factual_to_fact(s))
        except NormforgeError as exc:
            failures.append((s.key, exc))
    labels = {k: [r.label for r in v] for k, v in rules_by_key.items()}
    pairs: list[tuple[str, str]] = []
    for s in doc.statements:
        if s.kind is StatementKind.OVERRIDE:
            try:
                pairs.extend(override_to_superiority(s, doc, labels))
            except NormforgeError as exc:
                failures.append((s.key, exc))
    try:
        rules_by_key = attach_penalties(doc, rules_by_key)
    except NormforgeError as exc:
        failures.append(("reparations", exc))
    if failures:
        raise TransformError(failures)

    theory = Theory(tuple(facts), tuple(r for rs in rules_by_key.values() for r in rs), tuple(pairs))
    try:
        if opts.apply_reduct:
            theory = reduct(theory)
        if opts.apply_verify_rules:
            theory = verify_body(verify_rule_generation(theory), labels)
    except NormforgeError as exc:
        raise TransformError([("theory", exc)]) from exc
    report = validate_theory(theory)
    if not report.ok:
        raise TransformError([("theory", ConstraintViolation(i.detail)) for i in report.issues])
    return theory
