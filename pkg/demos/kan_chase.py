"""
Left Kan extensions by chase
============================

Data on a small category is pushed along a functor by adding the elements
each arrow demands and merging whatever the equations identify.
"""

from modelspace import fincat
from modelspace.cset import CSet
from modelspace.fincat import FinCat, FinFunctor, Generator, Path
from modelspace.leftkan import ChaseBudgetExceeded, chase_set

# Two discrete points pushed into the arrow 0 -> 1. The element at 0 needs
# an image along the arrow, so the value at 1 grows by one.
two = fincat.discrete(["0", "1"])
arrow = fincat.path_shape(2)
X = CSet(two, (1, 1), (), (("a",), ("b",)))
kan = chase_set(X, FinFunctor(two, arrow, (0, 1), ()))
print("sizes:", kan.lan.parts, "elements at 1:", kan.lan.names(1))

# With an idempotent loop e.e = e, two seeds become four elements and stop.
M = FinCat(("*",), (Generator("e", 0, 0),), ((Path(0, 0, (0, 0)), Path(0, 0, (0,))),))
kan = chase_set(CSet(fincat.terminal(), (2,), ()), FinFunctor(fincat.terminal(), M, (0,), ()))
print("idempotent loop:", kan.lan.parts, "after", kan.rounds, "rounds")

# A free loop never saturates; the chase gives up after its round budget.
try:
    chase_set(CSet(fincat.terminal(), (1,), ()),
              FinFunctor(fincat.terminal(), fincat.free_loop(), (0,), ()), budget=20)
except ChaseBudgetExceeded as exc:
    print("free loop:", exc)
