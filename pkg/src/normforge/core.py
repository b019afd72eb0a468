"""Domain model for modal defeasible theories.

Literals, reparation chains, rules and theories are immutable values. The
canonical text form of a literal is ``[TAG:bearer:aux]`` followed by an
optional ``-`` and the atom, e.g. ``[OBL:NULL:NULL]-surcharge(X)``; plain
literals omit the bracketed prefix.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Sequence, Union

from .errors import LiteralSyntaxError, MalformedHeadError, UnsupportedModalityError

__all__ = [
    "Tag", "RuleType", "Variable", "Constant", "Term", "Atom", "Modality", "ModalLiteral",
    "OmegaChain", "CondRef", "Rule", "Theory", "ConclusionTag", "Issue", "ValidationReport",
    "complement", "conflicts_with", "conflict_partners", "CONFLICT_TABLE", "normalize_chain",
    "comply_set", "violate_set", "validate_theory", "parse_literal", "format_literal",
    "parse_term", "format_term",
]


class Tag(str, enum.Enum):
    NONE = "NONE"
    OBL = "OBL"
    PER = "PER"
    PRO = "PRO"
    RIGHT = "RIGHT"


class RuleType(str, enum.Enum):
    STRICT = "strict"
    DEFEASIBLE = "defeasible"
    DEFEATER = "defeater"


@dataclass(frozen=True, order=True)
class Variable:
    name: str

    def __str__(self) -> str:
        return format_term(self)


@dataclass(frozen=True, order=True)
class Constant:
    name: str

    def __str__(self) -> str:
        return format_term(self)


Term = Union[Variable, Constant]


@dataclass(frozen=True)
class Atom:
    predicate: str
    args: tuple[Term, ...] = ()

    def __post_init__(self) -> None:
        if not self.predicate:
            raise ValueError("atom predicate must be non-empty")
        if not isinstance(self.args, tuple):
            object.__setattr__(self, "args", tuple(self.args))
        object.__setattr__(self, "_hash", hash((self.predicate, self.args)))

    def __hash__(self) -> int:
        return self._hash

    @property
    def arity(self) -> int:
        return len(self.args)

    def variables(self) -> set[Variable]:
        return {a for a in self.args if isinstance(a, Variable)}

    def __str__(self) -> str:
        return _format_atom(self, fact=False)


@dataclass(frozen=True)
class Modality:
    tag: Tag = Tag.NONE
    bearer: str | None = None
    auxiliary: str | None = None

    def __post_init__(self) -> None:
        if not isinstance(self.tag, Tag):
            object.__setattr__(self, "tag", Tag(self.tag))
        if self.tag is Tag.NONE and (self.bearer is not None or self.auxiliary is not None):
            raise ValueError("a plain (NONE) modality cannot carry bearer/auxiliary slots")

    def __str__(self) -> str:
        if self.tag is Tag.NONE:
            return ""
        return f"[{self.tag.value}:{self.bearer or 'NULL'}:{self.auxiliary or 'NULL'}]"


PLAIN = Modality()


@dataclass(frozen=True)
class ModalLiteral:
    atom: Atom
    negated: bool = False
    modality: Modality = PLAIN

    # literals are hashed constantly by the reasoner, so the hash is cached
    def __post_init__(self) -> None:
        object.__setattr__(self, "_hash", hash((self.atom, self.negated, self.modality)))

    def __hash__(self) -> int:
        return self._hash

    @classmethod
    def of(cls, text: str) -> "ModalLiteral":
        return parse_literal(text)

    @property
    def tag(self) -> Tag:
        return self.modality.tag

    @property
    def plain(self) -> "ModalLiteral":
        """The same (possibly negated) atom without its modality."""
        return ModalLiteral(self.atom, self.negated)

    def with_modality(self, modality: Modality) -> "ModalLiteral":
        return ModalLiteral(self.atom, self.negated, modality)

    def __str__(self) -> str:
        return format_literal(self)

    def __repr__(self) -> str:
        return f"ModalLiteral({format_literal(self)!r})"


# Reparation chains are flat tuples; associativity is implicit in the representation.
OmegaChain = tuple


@dataclass(frozen=True)
class CondRef:
    """A pending Violation/Compliance element.

    ``literal`` is set when the reference points at a literal; otherwise the
    reference names a norm whose status has to be verified by auxiliary rules.
    """

    kind: str  # "violation" | "compliance"
    key: str
    literal: ModalLiteral | None = None

    @property
    def targets_rule(self) -> bool:
        return self.literal is None


@dataclass(frozen=True)
class Rule:
    label: str
    rtype: RuleType
    antecedent: tuple[ModalLiteral, ...]
    head: tuple[ModalLiteral, ...]
    body_refs: tuple[CondRef, ...] = ()
    # One tuple of attached references per head item, or empty when none.
    head_refs: tuple[tuple[CondRef, ...], ...] = ()

    def __post_init__(self) -> None:
        if not isinstance(self.rtype, RuleType):
            object.__setattr__(self, "rtype", RuleType(self.rtype))
        if isinstance(self.head, ModalLiteral):
            object.__setattr__(self, "head", (self.head,))
        head = tuple(self.head)
        if not head:
            raise MalformedHeadError(f"rule {self.label!r} has no head literal")
        object.__setattr__(self, "head", head)
        object.__setattr__(self, "antecedent", tuple(dict.fromkeys(self.antecedent)))
        object.__setattr__(self, "body_refs", tuple(dict.fromkeys(self.body_refs)))
        refs = tuple(tuple(r) for r in self.head_refs)
        if refs and not any(refs):
            refs = ()
        if refs and len(refs) != len(head):
            raise ValueError(f"rule {self.label!r}: head_refs must align with head items")
        object.__setattr__(self, "head_refs", refs)

    @property
    def conclusion(self) -> ModalLiteral:
        """The single head literal; only meaningful once chains are expanded."""
        return self.head[0]

    def refs_at(self, i: int) -> tuple[CondRef, ...]:
        return self.head_refs[i] if self.head_refs else ()

    def variables(self) -> set[Variable]:
        out: set[Variable] = set()
        for lit in (*self.antecedent, *self.head):
            out |= lit.atom.variables()
        return out

    def __str__(self) -> str:
        arrow = {RuleType.STRICT: "->", RuleType.DEFEASIBLE: "=>", RuleType.DEFEATER: "~>"}[self.rtype]
        body = ",".join(format_literal(a) for a in self.antecedent)
        head = " (x) ".join(format_literal(h) for h in self.head)
        return f"{self.label}: {body} {arrow} {head}" if body else f"{self.label}: {arrow} {head}"


@dataclass(frozen=True)
class Theory:
    facts: tuple[ModalLiteral, ...] = ()
    rules: tuple[Rule, ...] = ()
    superiority: tuple[tuple[str, str], ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "facts", tuple(dict.fromkeys(self.facts)))
        object.__setattr__(self, "rules", tuple(self.rules))
        object.__setattr__(
            self, "superiority", tuple(dict.fromkeys((w, l) for w, l in self.superiority))
        )

    @cached_property
    def by_label(self) -> dict[str, Rule]:
        return {r.label: r for r in self.rules}

    def rule(self, label: str) -> Rule:
        return self.by_label[label]

    def literals(self) -> set[ModalLiteral]:
        out = set(self.facts)
        for r in self.rules:
            out.update(r.antecedent)
            out.update(r.head)
        return out

    def predicates(self) -> set[str]:
        return {lit.atom.predicate for lit in self.literals()}

    @property
    def strict_rules(self) -> list[Rule]:
        return [r for r in self.rules if r.rtype is RuleType.STRICT]

    @property
    def defeasible_rules(self) -> list[Rule]:
        return [r for r in self.rules if r.rtype is RuleType.DEFEASIBLE]

    @property
    def defeaters(self) -> list[Rule]:
        return [r for r in self.rules if r.rtype is RuleType.DEFEATER]

    def is_ground(self) -> bool:
        return all(not lit.atom.variables() for lit in self.literals())

    def has_chains(self) -> bool:
        return any(len(r.head) > 1 for r in self.rules)

    def normalized(self) -> "Theory":
        """Order-insensitive canonical form: facts by text, rules by label, pairs lexicographic."""
        return Theory(
            facts=tuple(sorted(self.facts, key=lambda l: format_literal(l, fact=True))),
            rules=tuple(sorted(self.rules, key=lambda r: r.label)),
            superiority=tuple(sorted(self.superiority)),
        )

    def merged(self, other: "Theory") -> "Theory":
        return Theory(
            self.facts + other.facts,
            self.rules + other.rules,
            self.superiority + other.superiority,
        )


@dataclass(frozen=True)
class ConclusionTag:
    sign: str  # "+" | "-"
    level: str  # "delta" | "partial"
    literal: ModalLiteral

    def __post_init__(self) -> None:
        if self.sign not in "+-" or len(self.sign) != 1:
            raise ValueError(f"bad sign {self.sign!r}")
        if self.level not in ("delta", "partial"):
            raise ValueError(f"bad level {self.level!r}")

    def __str__(self) -> str:
        sym = "D" if self.level == "delta" else "d"
        return f"{self.sign}{sym} {format_literal(self.literal, fact=True)}"


# --------------------------------------------------------------------------
# literal algebra


def complement(lit: ModalLiteral) -> ModalLiteral:
    return ModalLiteral(lit.atom, not lit.negated, lit.modality)


# (tag_a, tag_b, same_polarity): literals conflict when their atoms match, the
# slots match, and their negation flags are equal (True) or opposite (False).
CONFLICT_TABLE: tuple[tuple[Tag, Tag, bool], ...] = (
    (Tag.NONE, Tag.NONE, False),
    (Tag.OBL, Tag.OBL, False),
    (Tag.PRO, Tag.PRO, False),
    (Tag.OBL, Tag.PRO, True),
    (Tag.PER, Tag.PRO, True),
    (Tag.PER, Tag.OBL, False),
)


def _conflict_index(table) -> dict[Tag, list[tuple[Tag, bool]]]:
    index: dict[Tag, list[tuple[Tag, bool]]] = {}
    for a, b, same in table:
        index.setdefault(a, []).append((b, same))
        if a is not b:
            index.setdefault(b, []).append((a, same))
    return index


_CONFLICTS = _conflict_index(CONFLICT_TABLE)


def conflicts_with(a: ModalLiteral, b: ModalLiteral) -> bool:
    if a.atom != b.atom:
        return False
    ma, mb = a.modality, b.modality
    if (ma.bearer, ma.auxiliary) != (mb.bearer, mb.auxiliary):
        return False
    same = a.negated == b.negated
    return (mb.tag, same) in _CONFLICTS.get(ma.tag, ())


def conflict_partners(lit: ModalLiteral) -> list[ModalLiteral]:
    """Every literal that conflicts with ``lit``; the table makes this finite."""
    m = lit.modality
    out = []
    for tag, same in _CONFLICTS.get(m.tag, ()):
        mod = m if tag is m.tag else Modality(tag, m.bearer, m.auxiliary) if tag is not Tag.NONE else None
        if mod is None:
            continue
        out.append(ModalLiteral(lit.atom, lit.negated if same else not lit.negated, mod))
    return out


def normalize_chain(chain: Iterable[ModalLiteral]) -> tuple[ModalLiteral, ...]:
    """Flatten and contract: later duplicates of an item are dropped."""
    return tuple(dict.fromkeys(chain))


def _deontic_sets(lit: ModalLiteral, comply: bool) -> tuple[ModalLiteral, ...]:
    q = lit.plain
    tag = lit.tag
    if tag is Tag.NONE:
        return (q,) if comply else (complement(q),)
    if tag is Tag.OBL:
        return (lit, q) if comply else (lit, complement(q))
    if tag is Tag.PRO:
        return (lit, complement(q)) if comply else (lit, q)
    raise UnsupportedModalityError(
        f"compliance/violation is only defined for plain, OBL and PRO literals, not {tag.value}"
    )


def comply_set(lit: ModalLiteral) -> tuple[ModalLiteral, ...]:
    """Literals that must hold for ``lit`` to count as complied with (modal item first)."""
    return _deontic_sets(lit, comply=True)


def violate_set(lit: ModalLiteral) -> tuple[ModalLiteral, ...]:
    """Literals that must hold for ``lit`` to count as violated (modal item first)."""
    return _deontic_sets(lit, comply=False)


# --------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class Issue:
    kind: str  # cycle | dangling-label | duplicate-label | arity-mismatch | chain-on-non-defeasible
    detail: str
    labels: tuple[str, ...] = ()


@dataclass(frozen=True)
class ValidationReport:
    issues: tuple[Issue, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.issues

    def of_kind(self, kind: str) -> list[Issue]:
        return [i for i in self.issues if i.kind == kind]

    def __bool__(self) -> bool:
        return self.ok


def _find_cycle(edges: Sequence[tuple[str, str]]) -> list[str] | None:
    graph: dict[str, list[str]] = {}
    for w, l in edges:
        graph.setdefault(w, []).append(l)
        graph.setdefault(l, [])
    WHITE, GREY, BLACK = 0, 1, 2
    color = dict.fromkeys(graph, WHITE)
    for root in graph:
        if color[root] != WHITE:
            continue
        path = [root]
        color[root] = GREY
        stack: list[Iterator[str]] = [iter(graph[root])]
        while stack:
            nxt = next(stack[-1], None)
            if nxt is None:
                color[path.pop()] = BLACK
                stack.pop()
            elif color[nxt] == GREY:
                return path[path.index(nxt):]
            elif color[nxt] == WHITE:
                color[nxt] = GREY
                path.append(nxt)
                stack.append(iter(graph[nxt]))
    return None


def validate_theory(theory: Theory) -> ValidationReport:
    issues: list[Issue] = []
    seen: set[str] = set()
    for r in theory.rules:
        if r.label in seen:
            issues.append(Issue("duplicate-label", f"label {r.label!r} used twice", (r.label,)))
        seen.add(r.label)
        if len(r.head) > 1 and r.rtype is not RuleType.DEFEASIBLE:
            issues.append(Issue(
                "chain-on-non-defeasible",
                f"{r.rtype.value} rule {r.label!r} carries a reparation chain", (r.label,)))
    for w, l in theory.superiority:
        for lab in (w, l):
            if lab not in seen:
                issues.append(Issue("dangling-label", f"superiority names unknown rule {lab!r}", (lab,)))
    cycle = _find_cycle(theory.superiority)
    if cycle:
        issues.append(Issue("cycle", "superiority cycle " + " > ".join(cycle + cycle[:1]), tuple(cycle)))
    arity: dict[str, int] = {}
    for lit in sorted(theory.literals(), key=format_literal):
        p, n = lit.atom.predicate, lit.atom.arity
        if arity.setdefault(p, n) != n:
            issues.append(Issue("arity-mismatch", f"predicate {p!r} used with arity {arity[p]} and {n}", ()))
            arity[p] = n
    return ValidationReport(tuple(issues))


# --------------------------------------------------------------------------
# canonical text syntax

_BARE = re.compile(r"[A-Za-z0-9_][A-Za-z0-9_%.\-]*\Z")
_PRED = re.compile(r"[A-Za-z_][A-Za-z0-9_%.\-]*\Z")
_LITERAL = re.compile(
    r"""\s*
    (?:\[\s*(?P<tag>[A-Za-z]+)\s*(?::\s*(?P<bearer>[^:\]\s]+)\s*:\s*(?P<aux>[^:\]\s]+)\s*)?\])?
    \s*(?P<neg>[-¬])?
    \s*(?P<pred>[A-Za-z_][A-Za-z0-9_%.\-]*)
    \s*(?:\((?P<args>[^()]*)\))?\s*\Z""",
    re.VERBOSE,
)


def format_term(term: Term, fact: bool = False) -> str:
    name = term.name
    if isinstance(term, Variable):
        bare = not fact and name[:1].isupper() and _BARE.match(name)
        return name if bare else f"?{name}"
    if _BARE.match(name) and (fact or not name[:1].isupper()):
        return name
    return f'"{name}"'


def parse_term(text: str, fact: bool = False) -> Term:
    text = text.strip()
    if len(text) >= 2 and text[0] == text[-1] == '"':
        return Constant(text[1:-1])
    if text.startswith("?") and _BARE.match(text[1:]):
        return Variable(text[1:])
    if not _BARE.match(text):
        raise LiteralSyntaxError(f"bad term {text!r}")
    if not fact and text[0].isupper():
        return Variable(text)
    return Constant(text)


def _format_atom(atom: Atom, fact: bool) -> str:
    if not atom.args:
        return atom.predicate
    return f"{atom.predicate}({','.join(format_term(t, fact) for t in atom.args)})"


def format_literal(lit: ModalLiteral, fact: bool = False) -> str:
    """Canonical text of a literal; ``fact=True`` prints every constant bare."""
    return f"{lit.modality}{'-' if lit.negated else ''}{_format_atom(lit.atom, fact)}"


def _slot(text: str | None) -> str | None:
    if text is None or text.upper() == "NULL":
        return None
    return text


def parse_literal(text: str, fact: bool = False) -> ModalLiteral:
    """Parse canonical literal text.

    ``[OBL]p`` is accepted as shorthand for ``[OBL:NULL:NULL]p`` and ``¬`` for
    ``-``. In fact context bare identifiers are constants regardless of case.
    """
    m = _LITERAL.match(text)
    if not m:
        raise LiteralSyntaxError(f"cannot parse literal {text!r}")
    tag_text = m["tag"]
    if tag_text is None:
        modality = PLAIN
    else:
        try:
            tag = Tag(tag_text.upper())
        except ValueError:
            raise LiteralSyntaxError(f"unknown modality {tag_text!r} in {text!r}") from None
        if tag is Tag.NONE:
            raise LiteralSyntaxError(f"NONE is not a printable modality: {text!r}")
        modality = Modality(tag, _slot(m["bearer"]), _slot(m["aux"]))
    args: tuple[Term, ...] = ()
    if m["args"] is not None and m["args"].strip():
        args = tuple(parse_term(a, fact) for a in _split_args(m["args"]))
    return ModalLiteral(Atom(m["pred"], args), m["neg"] is not None, modality)


def _split_args(text: str) -> list[str]:
    out, cur, quoted = [], [], False
    for ch in text:
        if ch == '"':
            quoted = not quoted
        if ch == "," and not quoted:
            out.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    out.append("".join(cur))
    return out
