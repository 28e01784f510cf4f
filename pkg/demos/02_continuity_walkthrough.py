"""Continuity is syntax-directed.

The functional of a monadic body built from return, bind, conditionals,
case splits, and applied recursive calls is continuous by construction.
The checker replays that argument rule by rule; for trace the derivation
is exactly six steps.
"""

from mfx import check_continuous, explain
from mfx.corpus import load_program

prog = load_program("trace")
d = check_continuous(prog.fun_def("trace"))

print("Derivation for trace (pre-order, the order the goals arise):\n")
print(explain(d, "trace"))
print(f"\n{d.size()} rule applications: the root (Lam) strips the argument,"
      "\n(If) splits the conditional, the zero branch closes with (Const),"
      "\n(Bind) splits the do-block, the recursive call closes with (Rec),"
      "\nand the continuation, which is recursion-free, closes with (Const).")

print("\nThe same machinery handles the heap-monad corpus:\n")
for name in ("traverse", "occurs"):
    p = load_program(name)
    deriv = check_continuous(p.fun_def(name))
    seq = ", ".join(r.value for r in deriv.rule_sequence())
    print(f"  {name}: {seq}")
