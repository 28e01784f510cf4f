"""Kleene iteration: approximants, chains, and honest divergence.

The i-th approximant of a recursive definition is evaluation with a
recursion budget of i; the approximants at a fixed input form an ascending
chain in the flat order whose least upper bound, once the chain stabilizes,
is the value of the least fixed point.  On inputs where the function is
undefined the chain never leaves bottom and the only honest answer is
"did not terminate within the cap".
"""

from mfx import EMPTY_HEAP, VCtor, VNat, VRef, approx_chain, run_lfp, unfold_once
from mfx.corpus import load_heap, load_program

trace = load_program("trace")

print("Chain of approximants for trace(6):\n")
chain = approx_chain(trace, "trace", (VNat(6),), EMPTY_HEAP, 7)
for i, o in enumerate(chain):
    print(f"  F^{i} bottom (6) = {o}")

print("""
The run 6 -> 3 -> 1 -> 0 nests three recursive calls, so four unfoldings
are needed before the chain steps up; flat chains step up at most once.
""")

print("At the stabilization point, one more unfolding changes nothing")
print("(the fixed-point equation, observed at desk scale):\n")
stable = chain.elems[4]
again = unfold_once(trace, "trace", (VNat(6),), EMPTY_HEAP, 4)
print(f"  F(F^4 bottom)(6) = {again}  ==  F^4 bottom (6) = {stable}\n")

traverse = load_program("traverse")
cyclic = load_heap("cyclic")
arg = VCtor("Node", (VNat(7), VRef(0)))

print(f"A cyclic linked list never stabilizes: heap = {cyclic}")
out = run_lfp(traverse, "traverse", (arg,), cyclic, 1000)
print(f"  traverse(Node(7, ref0)) = {out}")
print("\nDiverged is a result kind, not an error: partiality is the point.")
