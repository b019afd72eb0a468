"""
Late payment and its reparations
================================

A prescriptive statement with a penalty chain: pay within 7 days, otherwise
pay with 5% interest, otherwise with 6.5%. We compile it, look at the rules
the chain expands into, then ask what the buyer owes once a deadline is missed.
"""

from normforge import compute_extension, ground, parse_document, parse_literal, render_dfl, transform
from normforge.core import Theory

CONTRACT = """<?xml version="1.0" encoding="UTF-8"?>
<lrml:LegalRuleML xmlns:lrml="http://docs.oasis-open.org/legalruleml/ns/v1.0/"
                  xmlns:ruleml="http://ruleml.org/spec">
 <lrml:Statements>
  <lrml:PrescriptiveStatement key="ps1">
   <ruleml:Rule>
    <ruleml:if><ruleml:And>
     <ruleml:Atom><ruleml:Rel iri=":goods"/><ruleml:Var>X</ruleml:Var></ruleml:Atom>
     <ruleml:Atom><ruleml:Rel iri=":invoice"/><ruleml:Var>X</ruleml:Var></ruleml:Atom>
    </ruleml:And></ruleml:if>
    <ruleml:then>
     <lrml:Obligation><ruleml:Atom><ruleml:Rel iri=":payIn7days"/><ruleml:Var>X</ruleml:Var></ruleml:Atom></lrml:Obligation>
    </ruleml:then>
   </ruleml:Rule>
  </lrml:PrescriptiveStatement>
  <lrml:PenaltyStatement key="pen1">
   <lrml:SuborderList>
    <lrml:Obligation><ruleml:Atom><ruleml:Rel iri=":payWith5%Interest"/><ruleml:Var>X</ruleml:Var></ruleml:Atom></lrml:Obligation>
    <lrml:Obligation><ruleml:Atom><ruleml:Rel iri=":payWith6.5%Interest"/><ruleml:Var>X</ruleml:Var></ruleml:Atom></lrml:Obligation>
   </lrml:SuborderList>
  </lrml:PenaltyStatement>
  <lrml:ReparationStatement key="rep1">
   <lrml:Reparation>
    <lrml:appliesPenalty keyref="#pen1"/>
    <lrml:toPrescriptiveStatement keyref="#ps1"/>
   </lrml:Reparation>
  </lrml:ReparationStatement>
 </lrml:Statements>
</lrml:LegalRuleML>
"""

theory = transform(parse_document(CONTRACT))
# every link of the chain becomes its own rule guarded by the violation of the previous one
print(render_dfl(theory))


def owed(*facts):
    t = ground(theory.merged(Theory(tuple(parse_literal(f, fact=True) for f in facts))))
    return sorted(str(c.literal) for c in compute_extension(t).conclusions()
                  if c.sign == "+" and c.level == "partial" and c.literal.tag.value == "OBL")


print("delivered and invoiced:      ", owed("goods(o7)", "invoice(o7)"))
print("... and 7 days went by:      ", owed("goods(o7)", "invoice(o7)", "-payIn7days(o7)"))
print("... and the 5% went unpaid:  ",
      owed("goods(o7)", "invoice(o7)", "-payIn7days(o7)", "-payWith5%Interest(o7)"))
