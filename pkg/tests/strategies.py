"""Random theory generators shared by the property and acceptance tests."""

from __future__ import annotations

import os
import random
from pathlib import Path

from hypothesis import strategies as st

from normforge.core import Atom, Constant, Modality, ModalLiteral, Rule, RuleType, Tag, Theory, Variable

DATA = Path(__file__).parent / "data"
SEED = int(os.environ.get("NORMFORGE_SEED", 0))

_TAGS = [Tag.NONE, Tag.NONE, Tag.OBL, Tag.PER, Tag.PRO]


def random_literal(rng: random.Random, n_atoms: int) -> ModalLiteral:
    tag = rng.choice(_TAGS)
    return ModalLiteral(Atom(f"p{rng.randrange(n_atoms)}"), rng.random() < 0.4, Modality(tag))


def random_ground_theory(rng: random.Random, max_literals: int = 20, max_rules: int = 30) -> Theory:
    """Ground, singleton-headed theory with a random acyclic superiority relation.

    The literal pool is capped at ``max_literals`` distinct literals.
    """
    n_atoms = rng.randint(1, max(1, max_literals // 4))
    pool = list(dict.fromkeys(random_literal(rng, n_atoms) for _ in range(max_literals)))
    n_rules = rng.randint(0, max_rules)
    rules = []
    for i in range(n_rules):
        rtype = rng.choices(list(RuleType), weights=(2, 6, 2))[0]
        body = tuple(rng.sample(pool, rng.randint(0, min(3, len(pool)))))
        rules.append(Rule(f"r{i}", rtype, body, (rng.choice(pool),)))
    facts = tuple(rng.sample(pool, rng.randint(0, min(4, len(pool)))))
    order = list(range(n_rules))
    rng.shuffle(order)
    rank = {r: k for k, r in enumerate(order)}
    pairs = set()
    for _ in range(rng.randint(0, 2 * n_rules)):
        a, b = rng.randrange(n_rules), rng.randrange(n_rules)
        if rank[a] < rank[b]:
            pairs.add((f"r{a}", f"r{b}"))
    return Theory(facts, tuple(rules), tuple(sorted(pairs)))


def random_theory(rng: random.Random, max_rules: int = 8) -> Theory:
    """Valid, possibly non-ground theory with reparation chains on defeasible rules."""
    preds = {f"p{i}": rng.randint(0, 2) for i in range(rng.randint(1, 6))}
    terms = [Variable("X"), Variable("Y"), Constant("g1"), Constant("JohnDoe")]

    def lit(tags=tuple(Tag)) -> ModalLiteral:
        pred = rng.choice(sorted(preds))
        args = tuple(rng.choice(terms) for _ in range(preds[pred]))
        tag = rng.choice(tags)
        slots = (None, None) if tag is Tag.NONE else (rng.choice([None, "Y", "b2"]), rng.choice([None, "a"]))
        return ModalLiteral(Atom(pred, args), rng.random() < 0.4, Modality(tag, *slots))

    rules = []
    n = rng.randint(0, max_rules)
    for i in range(n):
        rtype = rng.choice(list(RuleType))
        size = rng.randint(1, 3) if rtype is RuleType.DEFEASIBLE else 1
        items = [lit((Tag.NONE, Tag.OBL, Tag.PRO)) for _ in range(size - 1)] + [lit()]
        body = tuple(lit() for _ in range(rng.randint(0, 3)))
        rules.append(Rule(f"r{i}", rtype, body, tuple(dict.fromkeys(items))))
    pairs = set()
    for _ in range(rng.randint(0, n)):
        a, b = sorted(rng.sample(range(n), 2)) if n >= 2 else (0, 0)
        if a != b:
            pairs.add((f"r{a}", f"r{b}"))
    facts = tuple(lit() for _ in range(rng.randint(0, 3)))
    return Theory(facts, tuple(rules), tuple(sorted(pairs)))


# --------------------------------------------------------------------------
# hypothesis strategies

names = st.sampled_from(["p", "q", "pay", "deliver", "x_1", "rel2", "payWith5%Interest"])
slots = st.none() | st.sampled_from(["Y", "seller", "b2"])


@st.composite
def modalities(draw, allow_slots: bool = True):
    tag = draw(st.sampled_from(list(Tag)))
    if tag is Tag.NONE or not allow_slots:
        return Modality(tag)
    return Modality(tag, draw(slots), draw(slots))


@st.composite
def literals(draw, ground: bool = False, tags=None):
    pred = draw(names)
    arity = draw(st.integers(0, 2))
    terms = st.sampled_from([Constant("g1"), Constant("JohnDoe"), Constant("a")])
    if not ground:
        terms = terms | st.sampled_from([Variable("X"), Variable("Y")])
    args = tuple(draw(terms) for _ in range(arity))
    modality = Modality(draw(st.sampled_from(tags))) if tags else draw(modalities())
    return ModalLiteral(Atom(pred, args), draw(st.booleans()), modality)


@st.composite
def theories(draw, ground: bool = False, chains: bool = True, max_rules: int = 8):
    """Valid theories: unique labels, chains only on defeasible rules, acyclic superiority.

    Each predicate keeps one arity so the theory passes arity validation.
    """
    arity = {}

    def fix(lit: ModalLiteral) -> ModalLiteral:
        n = arity.setdefault(lit.atom.predicate, len(lit.atom.args))
        args = (lit.atom.args + (Constant("g1"),) * n)[:n]
        return ModalLiteral(Atom(lit.atom.predicate, args), lit.negated, lit.modality)

    lit = literals(ground=ground).map(fix)
    # items followed by a reparation need a violation set, so no PER/RIGHT there
    repairable = literals(ground=ground, tags=[Tag.NONE, Tag.OBL, Tag.PRO]).map(fix)
    n = draw(st.integers(0, max_rules))
    rules = []
    for i in range(n):
        rtype = draw(st.sampled_from(list(RuleType)))
        body = tuple(draw(st.lists(lit, max_size=3, unique=True)))
        size = draw(st.integers(1, 3)) if chains and rtype is RuleType.DEFEASIBLE else 1
        items = [draw(repairable) for _ in range(size - 1)] + [draw(lit)]
        head = tuple(dict.fromkeys(items))
        rules.append(Rule(f"r{i}", rtype, body, head))
    facts = tuple(draw(st.lists(lit, max_size=3, unique=True)))
    pairs = []
    if n >= 2:
        for _ in range(draw(st.integers(0, n))):
            a = draw(st.integers(0, n - 2))
            b = draw(st.integers(a + 1, n - 1))
            pairs.append((f"r{a}", f"r{b}"))
    return Theory(facts, tuple(rules), tuple(pairs))


@st.composite
def ground_theories(draw):
    seed = draw(st.integers(0, 2**32 - 1))
    return random_ground_theory(random.Random(seed), max_literals=12, max_rules=15)
