"""Defeasible extensions (+Δ, −Δ, +∂, −∂) under ambiguity blocking.

:func:`compute_extension` propagates rule/literal status through counters and
a work queue, touching each rule a bounded number of times. Conflicts use the
deontic table in :mod:`normforge.core`, so a literal may be attacked by rules
for several different literals. :func:`brute_force_extension` evaluates the
same proof conditions as a naive fixpoint and serves as a test oracle.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from typing import Iterable

from .core import (
    ConclusionTag,
    Constant,
    ModalLiteral,
    Rule,
    RuleType,
    Theory,
    Atom,
    Variable,
    complement,
    conflict_partners,
    conflicts_with,
)
from .errors import UnboundVariableError

__all__ = ["Extension", "ground", "language", "compute_extension", "brute_force_extension", "prove"]


@dataclass(frozen=True)
class Extension:
    plus_delta: frozenset[ModalLiteral]
    minus_delta: frozenset[ModalLiteral]
    plus_partial: frozenset[ModalLiteral]
    minus_partial: frozenset[ModalLiteral]
    language: frozenset[ModalLiteral]

    def holds(self, tag: ConclusionTag) -> bool:
        lit = tag.literal
        if lit not in self.language:
            # nothing in the theory mentions it: rejected at both levels
            return tag.sign == "-"
        sets = {
            ("+", "delta"): self.plus_delta,
            ("-", "delta"): self.minus_delta,
            ("+", "partial"): self.plus_partial,
            ("-", "partial"): self.minus_partial,
        }
        return lit in sets[tag.sign, tag.level]

    def conclusions(self) -> list[ConclusionTag]:
        out = []
        for sign, level, lits in (
            ("+", "delta", self.plus_delta), ("-", "delta", self.minus_delta),
            ("+", "partial", self.plus_partial), ("-", "partial", self.minus_partial),
        ):
            out.extend(ConclusionTag(sign, level, l) for l in lits)
        return sorted(out, key=str)


# --------------------------------------------------------------------------
# grounding


def _subst(lit: ModalLiteral, sub: dict[Variable, Constant]) -> ModalLiteral:
    if not sub:
        return lit
    args = tuple(sub.get(a, a) if isinstance(a, Variable) else a for a in lit.atom.args)
    return ModalLiteral(Atom(lit.atom.predicate, args), lit.negated, lit.modality)


def ground(theory: Theory) -> Theory:
    """Instantiate every rule over the constants of the theory.

    Instance labels carry the substitution, e.g. ``r1[X=g1]``. Superiority is
    inherited by instance pairs whose heads conflict (the only pairs the
    reasoner consults).
    """
    if theory.is_ground():
        return theory
    constants = sorted(
        {a for lit in theory.literals() for a in lit.atom.args if isinstance(a, Constant)},
        key=lambda c: c.name,
    )
    rules: list[Rule] = []
    instances: dict[str, list[Rule]] = {}
    for rule in theory.rules:
        vs = sorted(rule.variables(), key=lambda v: v.name)
        if not vs:
            rules.append(rule)
            instances[rule.label] = [rule]
            continue
        if not constants:
            body_vars = set().union(*(l.atom.variables() for l in rule.antecedent))
            free = sorted(v.name for v in rule.variables() - body_vars)
            if free:
                raise UnboundVariableError(
                    f"rule {rule.label!r}: head variables {free} are unbound and no constants exist")
            instances[rule.label] = []
            continue
        made = []
        for combo in itertools.product(constants, repeat=len(vs)):
            sub = dict(zip(vs, combo))
            suffix = ";".join(f"{v.name}={c.name}" for v, c in sub.items())
            made.append(Rule(
                f"{rule.label}[{suffix}]", rule.rtype,
                tuple(_subst(l, sub) for l in rule.antecedent),
                tuple(_subst(l, sub) for l in rule.head),
            ))
        rules.extend(made)
        instances[rule.label] = made
    pairs = [
        (w.label, l.label)
        for winner, loser in theory.superiority
        for w in instances.get(winner, [])
        for l in instances.get(loser, [])
        if conflicts_with(w.head[0], l.head[0])
    ]
    facts = tuple(f for f in theory.facts if not f.atom.variables())
    return Theory(facts, tuple(rules), tuple(pairs))


# --------------------------------------------------------------------------
# shared indexing


def language(theory: Theory) -> frozenset[ModalLiteral]:
    """Literals the extension is computed over: those mentioned plus complements."""
    lits = theory.literals()
    return frozenset(lits | {complement(l) for l in lits})


def _check(theory: Theory) -> None:
    if theory.has_chains():
        raise ValueError("theory has reparation chains; expand them with transform.reduct() first")
    if not theory.is_ground():
        raise ValueError("theory has variables; instantiate it with reasoner.ground() first")


class _Index:
    def __init__(self, theory: Theory):
        self.lang = language(theory)
        self.facts = frozenset(theory.facts)
        self.rules = list(theory.rules)
        self.heads = [r.head[0] for r in self.rules]
        self.bodies = [r.antecedent for r in self.rules]
        self.types = [r.rtype for r in self.rules]
        pos = {r.label: i for i, r in enumerate(self.rules)}
        self.sup = {(pos[w], pos[l]) for w, l in theory.superiority if w in pos and l in pos}
        self.superiors: dict[int, list[int]] = {}
        self.inferiors: dict[int, list[int]] = {}
        for w, l in self.sup:
            self.superiors.setdefault(l, []).append(w)
            self.inferiors.setdefault(w, []).append(l)
        self.with_head: dict[ModalLiteral, list[int]] = {}
        self.in_body: dict[ModalLiteral, list[int]] = {}
        for i, r in enumerate(self.rules):
            self.with_head.setdefault(self.heads[i], []).append(i)
            for a in r.antecedent:
                self.in_body.setdefault(a, []).append(i)
        self.partners = {q: [p for p in conflict_partners(q) if p in self.lang] for q in self.lang}

    def strict_for(self, q: ModalLiteral) -> list[int]:
        return [i for i in self.with_head.get(q, ()) if self.types[i] is RuleType.STRICT]

    def support_for(self, q: ModalLiteral) -> list[int]:
        return [i for i in self.with_head.get(q, ()) if self.types[i] is not RuleType.DEFEATER]

    def attackers_of(self, q: ModalLiteral) -> list[int]:
        return [i for p in self.partners[q] for i in self.with_head.get(p, ())]


# --------------------------------------------------------------------------
# linear propagation


def _definite(ix: _Index) -> tuple[set[ModalLiteral], set[ModalLiteral]]:
    plus: set[ModalLiteral] = set()
    minus: set[ModalLiteral] = set()
    strict = [i for i, t in enumerate(ix.types) if t is RuleType.STRICT]
    waiting = {i: len(ix.bodies[i]) for i in strict}
    queue = deque()

    def prove(q: ModalLiteral) -> None:
        if q not in plus:
            plus.add(q)
            queue.append(q)

    for f in ix.facts:
        prove(f)
    for i in strict:
        if waiting[i] == 0:
            prove(ix.heads[i])
    while queue:
        a = queue.popleft()
        for i in ix.in_body.get(a, ()):
            if ix.types[i] is RuleType.STRICT:
                waiting[i] -= 1
                if waiting[i] == 0:
                    prove(ix.heads[i])

    alive = {q: len(ix.strict_for(q)) for q in ix.lang}
    dead = [False] * len(ix.rules)
    for q in ix.lang:
        if alive[q] == 0 and q not in ix.facts:
            minus.add(q)
            queue.append(q)
    while queue:
        a = queue.popleft()
        for i in ix.in_body.get(a, ()):
            if ix.types[i] is RuleType.STRICT and not dead[i]:
                dead[i] = True
                h = ix.heads[i]
                alive[h] -= 1
                if alive[h] == 0 and h not in ix.facts and h not in minus:
                    minus.add(h)
                    queue.append(h)
    return plus, minus


def compute_extension(theory: Theory) -> Extension:
    """Extension of a ground theory whose rules all have single-literal heads."""
    _check(theory)
    ix = _Index(theory)
    pdelta, mdelta = _definite(ix)
    n = len(ix.rules)
    supporter = [t is not RuleType.DEFEATER for t in ix.types]

    waiting = [len(b) for b in ix.bodies]
    applicable = [False] * n
    discarded = [False] * n
    sup_applicable = dict.fromkeys(ix.lang, 0)
    sup_alive = {q: len(ix.support_for(q)) for q in ix.lang}
    attackers = {q: ix.attackers_of(q) for q in ix.lang}
    unresolved = {q: len(attackers[q]) for q in ix.lang}
    resolved: set[tuple[int, ModalLiteral]] = set()
    # live supporters of q that beat attacker s, keyed (s, q)
    beaters: dict[tuple[int, ModalLiteral], int] = {}
    for q in ix.lang:
        for s in attackers[q]:
            beaters[s, q] = sum(
                1 for t in ix.superiors.get(s, ()) if supporter[t] and ix.heads[t] == q)
    attack_wins = dict.fromkeys(ix.lang, False)
    conf_minus_delta = {q: all(p in mdelta for p in ix.partners[q]) for q in ix.lang}
    conf_plus_delta = {q: any(p in pdelta for p in ix.partners[q]) for q in ix.lang}

    plus: set[ModalLiteral] = set()
    minus: set[ModalLiteral] = set()
    queue: deque[tuple[bool, ModalLiteral]] = deque()

    def try_plus(q: ModalLiteral) -> None:
        if q in plus or q in minus:
            return
        if q in pdelta or (sup_applicable[q] and conf_minus_delta[q] and unresolved[q] == 0):
            plus.add(q)
            queue.append((True, q))

    def try_minus(q: ModalLiteral) -> None:
        if q in plus or q in minus or q not in mdelta:
            return
        if sup_alive[q] == 0 or conf_plus_delta[q] or attack_wins[q]:
            minus.add(q)
            queue.append((False, q))

    def resolve(s: int, q: ModalLiteral) -> None:
        if (s, q) not in resolved:
            resolved.add((s, q))
            unresolved[q] -= 1
            try_plus(q)

    def became_applicable(r: int) -> None:
        applicable[r] = True
        h = ix.heads[r]
        if supporter[r]:
            sup_applicable[h] += 1
            for s in ix.inferiors.get(r, ()):
                if conflicts_with(ix.heads[s], h):
                    resolve(s, h)
            try_plus(h)
        for q in ix.partners[h]:
            if beaters[r, q] == 0:
                attack_wins[q] = True
                try_minus(q)

    def became_discarded(r: int) -> None:
        discarded[r] = True
        h = ix.heads[r]
        if supporter[r]:
            sup_alive[h] -= 1
            for s in ix.inferiors.get(r, ()):
                if conflicts_with(ix.heads[s], h):
                    beaters[s, h] -= 1
                    if beaters[s, h] == 0 and applicable[s]:
                        attack_wins[h] = True
            try_minus(h)
        for q in ix.partners[h]:
            resolve(r, q)

    for r in range(n):
        if waiting[r] == 0:
            became_applicable(r)
    for q in ix.lang:
        try_plus(q)
        try_minus(q)
    while queue:
        proved, a = queue.popleft()
        for r in ix.in_body.get(a, ()):
            if proved:
                waiting[r] -= 1
                if waiting[r] == 0 and not applicable[r]:
                    became_applicable(r)
            elif not discarded[r]:
                became_discarded(r)

    return Extension(frozenset(pdelta), frozenset(mdelta), frozenset(plus), frozenset(minus), ix.lang)


# --------------------------------------------------------------------------
# naive oracle


def brute_force_extension(theory: Theory) -> Extension:
    """Re-evaluate the four proof conditions over every literal until nothing changes."""
    _check(theory)
    ix = _Index(theory)
    PD: set[ModalLiteral] = set()
    MD: set[ModalLiteral] = set()
    Pd: set[ModalLiteral] = set()
    Md: set[ModalLiteral] = set()

    def all_in(lits: Iterable[ModalLiteral], s: set) -> bool:
        return all(a in s for a in lits)

    def any_in(lits: Iterable[ModalLiteral], s: set) -> bool:
        return any(a in s for a in lits)

    changed = True
    while changed:
        changed = False
        for q in ix.lang:
            strict = ix.strict_for(q)
            support = ix.support_for(q)
            attack = ix.attackers_of(q)
            confl = ix.partners[q]
            if q not in PD and (q in ix.facts or any(all_in(ix.bodies[r], PD) for r in strict)):
                PD.add(q)
                changed = True
            if q not in MD and q not in ix.facts and all(any_in(ix.bodies[r], MD) for r in strict):
                MD.add(q)
                changed = True
            if q not in Pd:
                ok = q in PD or (
                    any(all_in(ix.bodies[r], Pd) for r in support)
                    and all(c in MD for c in confl)
                    and all(
                        any_in(ix.bodies[s], Md)
                        or any(all_in(ix.bodies[t], Pd) and (t, s) in ix.sup for t in support)
                        for s in attack
                    )
                )
                if ok:
                    Pd.add(q)
                    changed = True
            if q not in Md and q in MD:
                ok = (
                    all(any_in(ix.bodies[r], Md) for r in support)
                    or any(c in PD for c in confl)
                    or any(
                        all_in(ix.bodies[s], Pd)
                        and all(any_in(ix.bodies[t], Md) or (t, s) not in ix.sup for t in support)
                        for s in attack
                    )
                )
                if ok:
                    Md.add(q)
                    changed = True
    return Extension(frozenset(PD), frozenset(MD), frozenset(Pd), frozenset(Md), ix.lang)


def prove(theory: Theory, tag: ConclusionTag) -> bool:
    return compute_extension(theory).holds(tag)
