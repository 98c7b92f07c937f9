"""
Stratifying a sequence of disease models by geography
=====================================================

A model space is a diagram of Petri nets. Here a path of three disease
models is multiplied, over a common type system, by a path of one-, two-
and three-city geographies. The result is a 3 x 3 grid of stratified models.
"""

import numpy as np

from modelspace import diagram as dg, epi

# Everything is typed over one population species with infection, a generic
# disease step and travel.
X = epi.type_system()
print("type system:", X.names("S"), X.names("T"))

disease = epi.disease_path(("SIR", "SIRS", "SIRSV"))
geography = epi.geography_path((1, 2, 3))
print("disease path:", disease.diagram.nodes)
print("geography path:", geography.diagram.nodes)

# The typed product takes, at every pair of nodes, the pullback of the two
# typing maps. Arrows of the grid come from arrows of either factor.
grid = dg.typed_product([disease, geography]).apex
print(len(grid.diagram.nodes), "models,", len(grid.shape.generators), "arrows,",
      len(grid.shape.equations), "commuting squares")

# Species and transition counts across the grid
species = np.array([[grid.diagram[f"({d},{g})"].n("S") for g in geography.diagram.nodes]
                    for d in disease.diagram.nodes])
transitions = np.array([[grid.diagram[f"({d},{g})"].n("T") for g in geography.diagram.nodes]
                        for d in disease.diagram.nodes])
print("species\n", species)
print("transitions\n", transitions)

# One node up close: SIR in two cities
two = grid.diagram["(SIR,2city)"]
print("(SIR,2city) species:", two.names("S"))
for t in two.names("T"):
    print("   ", t)

# Each species remembers which disease state it stratifies, which is what
# lets a fitted model be compared against S, I, R data later.
print("observables:", grid.observables_at(grid.shape.ob("(SIR,2city)")))
