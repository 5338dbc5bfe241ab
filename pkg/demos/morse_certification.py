"""Deciding existence from critical points at infinity.

Three summaries for the disk: no critical points at k = 2, a single maximum
at k = 1, and a k = 2 summary whose counts match the Morse relations
exactly.  Only the first one yields a certificate.
"""

from qtopo.boundary import builtin_boundary_input
from qtopo.certifier import CritRecord, CritSummary, certify

disk = builtin_boundary_input("disk")


def run(label, summary):
    report = certify(summary, disk if summary.k > 1 else None)
    print(f"{label}")
    print(f"  counts      {report.counts}")
    if report.c_array is not None:
        print(f"  c array     {report.c_array}")
    sys_ = report.system
    print(f"  system      feasible={sys_.feasible} n={list(sys_.n)} {sys_.violation or ''}")
    print(f"  Hopf sum    {report.hopf.value} vs target {report.hopf.target}")
    fired = [j.l for j in report.jumps if j.certified]
    print(f"  jumps fired {fired or 'none'}")
    print(f"  verdict     {report.verdict}\n")


# nothing at infinity: the Morse relations cannot be met by zero counts
run("k = 2, empty", CritSummary(2))

# one boundary maximum with K decreasing inward: every criterion balances
run("k = 1, one maximum", CritSummary(1, records=[CritRecord(0, 1, 0, -1)]))

# a single index-2 point supplies the c_1 = 1 the k = 2 relations ask for,
# and the Hopf sum 1 equals 1 - chi(B_1) = 1 - 0
run("k = 2, one index-2 point", CritSummary(2, records=[CritRecord(0, 2, 2, -1)]))
