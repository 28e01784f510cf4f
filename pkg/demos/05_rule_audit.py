"""Auditing a generated rule against an executable specification.

check_rule_sampled enumerates each obligation's variables over a small
bounded domain, reading Q as an executable predicate, and independently
brute-forces the rule's conclusion wherever the function terminates.  A
correct specification passes both; a wrong one is refuted with a concrete
witness found by the enumerator.
"""

from mfx import DomainSpec, VList, VNat, check_rule_sampled, refined_rule
from mfx.corpus import load_program
from mfx.syntax import NAT, TList

prog = load_program("trace")
rule = refined_rule(prog.fun_def("trace"), prog)


def trace_ref(n):
    if n == 0:
        return []
    rest = trace_ref(n // 2)
    return [n] + rest if n % 2 == 0 else rest


def q_correct(n, ys):
    return ys == VList(tuple(VNat(i) for i in trace_ref(n.value)))


def q_wrong(n, ys):
    return ys == VList(())


# Seed the list domain with the reference results so the induction
# hypotheses bind meaningful lists for every n in range.
extra = (TList(NAT), tuple(VList(tuple(VNat(i) for i in trace_ref(k)))
                           for k in range(33)))
domain = DomainSpec(nat_max=32, list_max_len=2, list_elem_max=4, extra=(extra,))

print("Auditing the trace rule against the reference recursion:\n")
print(check_rule_sampled(rule, q_correct, domain))

print("\nAuditing against the wrong claim 'trace always returns []':\n")
print(check_rule_sampled(rule, q_wrong, domain))

print("""
The witness is the smallest counterexample the enumeration order reaches:
an even, nonzero n whose obligation concludes Q(n, n # tl) while the wrong
specification insists on the empty list.""")
