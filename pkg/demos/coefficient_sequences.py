"""
The integer sequence c(k) and the coefficients b(m)
===================================================

Two readings of the recursion for ``c``, the direct and hypergeometric
forms of ``b``, and the decay of ``|b(m)|``.
"""

import ultragraph as ug

print("generating function:", ug.c_sequence(8))
print("pinned c(1) = 1:    ", ug.c_sequence(8, "as_stated"))

# the finite sum and the terminating 2F1 agree
for m in range(8):
    print(m, ug.b_coefficient(m), ug.b_coefficient_hypergeometric(m))

# |b(m)| shrinks slowly
for m in (10, 20, 30, 40):
    print(f"|b({m})| = {abs(ug.b_coefficient(m)):.4e}")

print(ug.hypergeometric_2f1(-1, 2, 3, 0.5), ug.gauss_sum_2f1_at_1(-1, 0.5, 2))
