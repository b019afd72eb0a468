"""Scalability measurements over duplicated LegalRuleML documents.

The built-in base document mimics the shape of a mid-sized commercial
contract: 6 constitutive and 78 prescriptive statements plus 10 override
statements, over 121 distinct literals once transformed.
"""

from __future__ import annotations

import copy
import gc
import os
import random
import re
import statistics
import time
import tracemalloc
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from typing import Callable

from .lrml import LRML_NS, RULEML_NS, parse_document
from .render import render_lrml
from .transform import transform

__all__ = ["BenchRow", "synthetic_base", "duplicate", "run_bench", "linear_r2", "CSV_HEADER", "seed_from_env"]

CSV_HEADER = "k,statements,rules,parse_ms,transform_ms,render_ms,peak_mem_mb"

N_CONSTITUTIVE = 6
N_PRESCRIPTIVE = 78
N_OVERRIDE = 10
N_BASE_LITERALS = 37  # body-only literals; the 84 heads make up the rest of the 121

ET.register_namespace("lrml", LRML_NS)
ET.register_namespace("ruleml", RULEML_NS)


def seed_from_env(default: int = 0) -> int:
    return int(os.environ.get("NORMFORGE_SEED", default))


def _atom(pred: str) -> str:
    return f'<ruleml:Atom><ruleml:Rel iri=":{pred}"/><ruleml:Var>X</ruleml:Var></ruleml:Atom>'


def _body(preds: list[str]) -> str:
    return "<ruleml:if><ruleml:And>" + "".join(_atom(p) for p in preds) + "</ruleml:And></ruleml:if>"


def synthetic_base(seed: int | None = None) -> str:
    """XML text of the built-in base document; bodies vary with ``seed``."""
    rng = random.Random(seed_from_env() if seed is None else seed)
    base = [f"cond{i}" for i in range(N_BASE_LITERALS)]
    defined = [f"term{i}" for i in range(N_CONSTITUTIVE)]
    parts = []
    for i, head in enumerate(defined):
        preds = [base[i]] + rng.sample(base, rng.randint(0, 2))
        parts.append(
            f'<lrml:ConstitutiveStatement key="cs{i + 1}"><ruleml:Rule>{_body(list(dict.fromkeys(preds)))}'
            f"<ruleml:then>{_atom(head)}</ruleml:then></ruleml:Rule></lrml:ConstitutiveStatement>"
        )
    tags = ["Obligation", "Permission", "Prohibition"]
    for i in range(N_PRESCRIPTIVE):
        first = base[(i + N_CONSTITUTIVE) % N_BASE_LITERALS]
        preds = [first] + rng.sample(base + defined, rng.randint(0, 2))
        if i < 2 * N_OVERRIDE:
            # paired norms over one action, the odd one forbidding what the even one demands
            act = f"act{i - i % 2}"
            inner = f"<ruleml:Neg>{_atom(act)}</ruleml:Neg>" if i % 2 else _atom(act)
            head = f"<lrml:Obligation>{inner}</lrml:Obligation>"
        else:
            tag = tags[i % 3]
            head = f"<lrml:{tag}>{_atom(f'act{i}')}</lrml:{tag}>"
        parts.append(
            f'<lrml:PrescriptiveStatement key="ps{i + 1}"><ruleml:Rule>{_body(list(dict.fromkeys(preds)))}'
            f"<ruleml:then>{head}</ruleml:then></ruleml:Rule></lrml:PrescriptiveStatement>"
        )
    for j in range(N_OVERRIDE):
        over, under = (2 * j + 2, 2 * j + 1) if rng.random() < 0.5 else (2 * j + 1, 2 * j + 2)
        parts.append(
            f'<lrml:OverrideStatement key="ov{j + 1}">'
            f'<lrml:Override over="#ps{over}" under="#ps{under}"/></lrml:OverrideStatement>'
        )
    return (
        f'<?xml version="1.0" encoding="UTF-8"?>\n<lrml:LegalRuleML xmlns:lrml="{LRML_NS}" '
        f'xmlns:ruleml="{RULEML_NS}"><lrml:Statements>' + "".join(parts) + "</lrml:Statements></lrml:LegalRuleML>"
    )


_KEY_ATTRS = ("key", "keyref", "over", "under")


_ROOT_TAG = re.compile(r"<(?![?!])[^\s>/]+")


def _declare_prefixes(xml_text: str) -> str:
    # documents in the wild often use lrml:/ruleml: without declaring them
    m = _ROOT_TAG.search(xml_text)
    if m is None:
        return xml_text
    decls = "".join(
        f' xmlns:{prefix}="{uri}"'
        for prefix, uri in (("lrml", LRML_NS), ("ruleml", RULEML_NS))
        if f"xmlns:{prefix}=" not in xml_text
    )
    return xml_text[: m.end()] + decls + xml_text[m.end():]


def _statements(root: ET.Element) -> tuple[ET.Element, ET.Element]:
    """(document root, element whose children are the statements)."""
    if root.tag == f"{{{LRML_NS}}}LegalRuleML":
        found = root.find(f"{{{LRML_NS}}}Statements")
        return root, (found if found is not None else root)
    wrapper = ET.Element(f"{{{LRML_NS}}}LegalRuleML")
    holder = ET.SubElement(wrapper, f"{{{LRML_NS}}}Statements")
    holder.append(root)
    return wrapper, holder


def duplicate(xml_text: str, k: int) -> str:
    """Base statements plus ``k - 1`` renamed copies (keys suffixed ``_dup1`` …)."""
    root, holder = _statements(ET.fromstring(_declare_prefixes(xml_text)))
    originals = [el for el in holder if el.tag.endswith("Statement")]
    for i in range(1, k):
        for stmt in originals:
            clone = copy.deepcopy(stmt)
            for el in clone.iter():
                for attr in _KEY_ATTRS:
                    if attr in el.attrib:
                        el.attrib[attr] = f"{el.attrib[attr]}_dup{i}"
            holder.append(clone)
    return ET.tostring(root, encoding="unicode")


@dataclass(frozen=True)
class BenchRow:
    k: int
    statements: int
    rules: int
    parse_ms: float
    transform_ms: float
    render_ms: float
    peak_mem_mb: float

    def csv(self) -> str:
        return (f"{self.k},{self.statements},{self.rules},{self.parse_ms:.3f},"
                f"{self.transform_ms:.3f},{self.render_ms:.3f},{self.peak_mem_mb:.3f}")


def _cpu_ms(fn: Callable[[], object]) -> float:
    start = time.process_time()
    fn()
    return (time.process_time() - start) * 1000


def run_bench(base: str, duplications: int, runs: int = 5) -> list[BenchRow]:
    """Median CPU time per stage for k = 1..duplications.

    Runs are interleaved across k (run 1 for every k, then run 2, ...) so a
    burst of host contention lands on many k at once instead of bending the
    curve at one point; the median then discards it.
    """
    if runs < 1:
        raise ValueError("runs must be positive")
    cases = []
    for k in range(1, duplications + 1):
        text = duplicate(base, k)
        doc = parse_document(text)
        theory = transform(doc)
        render_lrml(theory)  # warm-up
        cases.append((k, text, doc, theory))
    samples = {k: ([], [], []) for k, *_ in cases}
    enabled = gc.isenabled()
    gc.disable()
    try:
        for _ in range(runs):
            for k, text, doc, theory in cases:
                parse, trans, rend = samples[k]
                parse.append(_cpu_ms(lambda: parse_document(text)))
                trans.append(_cpu_ms(lambda: transform(doc)))
                rend.append(_cpu_ms(lambda: render_lrml(theory)))
            gc.collect()
    finally:
        if enabled:
            gc.enable()
    rows = []
    for k, text, doc, theory in cases:
        tracemalloc.start()
        try:
            render_lrml(transform(parse_document(text)))
            _, peak = tracemalloc.get_traced_memory()
        finally:
            tracemalloc.stop()
        parse, trans, rend = (statistics.median(s) for s in samples[k])
        rows.append(BenchRow(k, len(doc.statements), len(theory.rules), parse, trans, rend, peak / 2**20))
    return rows


def linear_r2(xs: list[float], ys: list[float]) -> float:
    """Coefficient of determination of the least-squares line through the points."""
    if len(set(ys)) < 2:
        return 1.0
    return statistics.correlation(xs, ys) ** 2
