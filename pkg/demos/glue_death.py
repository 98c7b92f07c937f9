"""
Gluing model spaces with pushouts
=================================

Two pushouts of path-shaped spaces. The first joins two paths at a shared
first model and leaves every net untouched; the second glues a death
transition onto a whole sequence of disease models at once.
"""

from modelspace import cset, epi
from modelspace import diagram as dg
from modelspace.fincat import FinFunctor

sir, sirs, sird = (epi.disease_net(n, travel=False) for n in ("SIR", "SIRS", "SIRD"))

# Branching: SIR -> SIRS and SIR -> SIRD share their root.
left = dg.Diagram.sequence([sir, sirs], [epi.include(sir, sirs)], ["SIR", "SIRS"])
right = dg.Diagram.sequence([sir, sird], [epi.include(sir, sird)], ["SIR", "SIRD"])
root = dg.Diagram.single(sir, "SIR")
legs = [dg.DiagramMorphism(root, D, FinFunctor(root.shape, D.shape, (0,), ()),
                           (cset.CSetMorphism.identity(sir),))
        for D in (left, right)]
branch = dg.pushout(legs).apex
print("branching space:", branch.nodes)
for g in branch.shape.generators:
    print("   ", branch.nodes[g.src], "->", branch.nodes[g.tgt])

# Gluing death: the apex is the one-species net I. One leg picks out I in
# the first disease model, the other picks out I in the net I -> D.
path = epi.typed_path([sir, sirs], ["SIR", "SIRS"])
apex, legs, death = epi.death_span(path)
glued = dg.typed_pushout(legs, apex, [path, death]).apex

# The gluing is computed through a left Kan extension along the shape
# quotient, so death reaches SIRS too, not only the node it was attached to.
for name, net in zip(glued.diagram.nodes, glued.diagram.ob):
    print(f"{name}: species {net.names('S')}, transitions {net.names('T')}")

print("SIR node is SIRD:", cset.is_isomorphic(glued.diagram["SIR"], sird))
