"""From the raw fixed-point induction instance to readable case rules.

The raw partial-correctness rule carries the whole body as one premise.
Refinement walks the control-flow paths, replaces recursive-call equations
with specialized hypotheses Q(...), turns heap reads into explicit
get_ref applications, and substitutes local equations away, leaving one
obligation per path.
"""

from mfx import check_continuous, raw_rule, refine, render_rule
from mfx.corpus import load_program

for name in ("trace", "traverse", "occurs"):
    prog = load_program(name)
    f = prog.fun_def(name)
    raw = raw_rule(f, prog)
    refined = refine(raw, check_continuous(f))
    print("=" * 72)
    print(render_rule(raw))
    print()
    print(render_rule(refined))
    print()

print("""Reading the occurs rule: one obligation per case of the scanned
term.  The pointer-equality case concludes Q(r1, r1, h, h, true); the
instantiated-variable and application cases carry hypotheses whose pre- and
post-heaps chain left to right, exactly as the computation threads them.
A proof by this rule needs no mention of the underlying iteration.""")
