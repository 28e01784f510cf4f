"""Defining partial functions in the option monad.

trace iterates a step function until it hits zero, collecting the even
values it sees.  Asserting its recursive equation directly would be unsound
for general step functions, because nothing guarantees termination.  Written
monadically, the definition always makes sense: a run either produces
Some(list) or bottoms out.
"""

from mfx import EMPTY_HEAP, VNat, pretty_program, run_lfp
from mfx.corpus import load_program

prog = load_program("trace")

print("The program, as the parser understood it:\n")
print(pretty_program(prog))

print("Running trace to its least fixed point (step n = n div 2):\n")
for n in (0, 6, 17, 32, 100):
    out = run_lfp(prog, "trace", (VNat(n),), EMPTY_HEAP)
    print(f"  trace({n}) = {out}")

print("""
trace(32) keeps 32, 16, 8, 4, 2: every iterate is even until 1 is reached,
and 1 itself is odd.  Nothing here needed a termination proof; with a step
function that never reaches zero, the same definition would simply diverge.
""")
