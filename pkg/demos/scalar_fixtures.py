"""Walk through the two scalar fixtures by hand.

T1 is a self-adjoint triple with A = 2i, S0 = 3/4 and Pi0 = [2, 1].  Its first
potential is the j-unitary positive matrix [[233, 208], [208, 233]] / 105 and
its reflection coefficient at z = 1 equals (-80 - 24i) / 109.  The script
reproduces both values numerically, then repeats the exercise for the skew
fixture T2 (S0 = 5/4).
"""

from fractions import Fraction

import numpy as np

from dirac_gbdt import (
    ParameterTriple,
    Signature,
    SystemKind,
    build_sequence,
    fundamental_closed,
    fundamental_direct,
    reflection_closed,
    reflection_oracle,
    weyl_value,
)

np.set_printoptions(precision=6, suppress=True)


def self_adjoint_fixture():
    t1 = ParameterTriple(SystemKind.SELF_ADJOINT, Signature(1, 1),
                         np.array([[2j]]), np.array([[0.75]]), np.array([[2.0, 1.0]]))
    seq = build_sequence(t1, 5)
    print("T1: first potentials C_k")
    for k in range(3):
        print(f"  C_{k} =\n{seq.C[k].real}")
    exact = np.array([[233, 208], [208, 233]]) / 105
    print(f"  |C_0 - [[233,208],[208,233]]/105| = {np.max(np.abs(seq.C[0] - exact)):.1e}")
    print(f"  det C_0 in rationals: {Fraction(233, 105) ** 2 - Fraction(208, 105) ** 2}")

    target = (-80 - 24j) / 109
    print("\nT1: reflection coefficient at z = 1, three routes")
    print(f"  closed realization : {reflection_closed(t1, 1.0)[0, 0]:.12f}")
    print(f"  Weyl function      : {weyl_value(t1, 1.0)[0, 0]:.12f}")
    print(f"  Jost oracle        : {reflection_oracle(t1, 1.0, K=60, tol=1e-9)[0, 0]:.12f}")
    print(f"  expected           : {target:.12f}")


def skew_fixture():
    t2 = ParameterTriple(SystemKind.SKEW, Signature(1, 1),
                         np.array([[2j]]), np.array([[1.25]]), np.array([[2.0, 1.0]]))
    seq = build_sequence(t2, 10)
    C0 = seq.C[0]
    print("\nT2: skew potential C_0 (Hermitian involution, zero trace)")
    print(C0)
    print(f"  |C_0^2 - I| = {np.max(np.abs(C0 @ C0 - np.eye(2))):.1e}, trace = {np.trace(C0).real:.1e}")
    z = 0.7 + 0.4j
    W_direct = fundamental_direct(seq, 10, z)
    W_closed = fundamental_closed(seq, 10, z)
    print(f"  fundamental solution at k = 10, z = {z}: product vs closed form gap "
          f"{np.linalg.norm(W_direct - W_closed, 2) / np.linalg.norm(W_direct, 2):.1e}")
    print(f"  reflection coefficient at z = 2: closed {reflection_closed(t2, 2.0)[0, 0]:.10f}, "
          f"oracle {reflection_oracle(t2, 2.0, K=200, tol=1e-10)[0, 0]:.10f}")


if __name__ == "__main__":
    self_adjoint_fixture()
    skew_fixture()
