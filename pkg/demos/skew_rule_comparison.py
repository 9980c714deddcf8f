"""Two readings of the skew reflection-coefficient realization.

The skew closed form is ``-i L (z I + K)^{-1} R`` with core matrix ``K`` (the
corrected form).  A misprinted variant replaces the factor by
``(z I + z K)^{-1}`` (the literal form).  Only the corrected form matches the
Jost-solution oracle on the real axis.  The literal one agrees at z = 1, where
both factors coincide, and nowhere else.
"""

from dirac_gbdt import Signature, SystemKind, build_sequence, generate
from dirac_gbdt.spectral import realization, reflection_oracle, relative_gap

t = generate(SystemKind.SKEW, 3, Signature(1, 2), seed=11)
seq = build_sequence(t, 400)
real = realization(t)

print(f"{'z':>6} {'corrected vs oracle':>22} {'literal vs oracle':>20}")
for z in (-3.0, -1.5, -0.5, 0.5, 1.0, 1.5, 3.0):
    oracle = reflection_oracle(t, z, K=400, C=seq.C)
    corrected = real(z, form="corrected")
    literal = real(z, form="literal")
    print(f"{z:>6.2f} {relative_gap(corrected, oracle):>22.2e} {relative_gap(literal, oracle):>20.2e}")
