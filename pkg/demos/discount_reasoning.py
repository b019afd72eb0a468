"""
Discounts, exceptions and exceptions to exceptions
==================================================

A shop's pricing policy written as three defeasible rules. Each new fact
activates a stronger rule and the conclusion about the discount flips.
"""

from normforge import compute_extension, ground, parse_dfl, parse_literal, render_dfl
from normforge.core import Theory

policy = parse_dfl("""
r1: specialOrder(X) => -Discount(X)
r2: premiumCustomer(X) => Discount(X)
r3: promotion(X) => -Discount(X)
r3 > r2
r2 > r1
""")
print(render_dfl(policy))

# the same order, with more and more facts known about it
known = []
for extra in ["specialOrder(g1)", "premiumCustomer(g1)", "promotion(g1)"]:
    known.append(parse_literal(extra, fact=True))
    ext = compute_extension(ground(policy.merged(Theory(tuple(known)))))
    verdict = [str(c) for c in ext.conclusions() if c.sign == "+" and "Discount" in str(c)]
    print(f"facts: {', '.join(map(str, known))}")
    print(f"  -> {verdict}")
