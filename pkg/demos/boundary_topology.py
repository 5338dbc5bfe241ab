"""Homology of boundary barycenter spaces for the disk and the annulus.

For each order we print the reduced Z/2 Betti numbers, the Euler
characteristic they imply, and the closed-form value it must agree with.
"""

from qtopo.barycenters import CircleProvider, disjoint_union_barycenter
from qtopo.boundary import boundary_betti, builtin_boundary_input, euler_boundary
from qtopo.graded import euler_characteristic


def show(name, max_order):
    inp = builtin_boundary_input(name)
    print(f"{name}: chi(M) = {inp.chi_M}")
    for l in range(1, max_order + 1):
        table = boundary_betti(inp, l)
        chi = euler_characteristic(table)
        closed = euler_boundary(inp.chi_M, l, inp.dim_even)
        print(f"  order {l}: ranks {table.ranks}  chi {chi}  (closed form {closed})")


show("disk", 3)
# order 2 of the disk has the homology of S^2 v S^3;
# and beyond order 3 we would need B_2(S^2), which is not built in
show("annulus", 3)

# The annulus boundary is two circles; its barycenter spaces come from the
# disjoint-union formula.  Order 3 gives four 5-spheres and three 4-spheres.
s = CircleProvider()
print("B_3(S^1 u S^1):", disjoint_union_barycenter(s, s, 3).ranks)
