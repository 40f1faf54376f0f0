"""Generate the shipped H2 / STO-3G spin-orbital integrals.

Writes crates/core/data/h2/h2_sto3g_0735.int in the integral file format read
by hea-core: spin orbitals interleaved (alpha, beta), `g p q r s` is the
coefficient of 1/2 a+_p a+_q a_r a_s, i.e. the chemist integral (ps|qr).

Requires pyscf. Usage: python scripts/h2_integrals.py [bond_length_angstrom]
"""

import sys
from pathlib import Path

import numpy as np
from pyscf import ao2mo, gto, scf

bond = float(sys.argv[1]) if len(sys.argv) > 1 else 0.735
mol = gto.M(atom=f"H 0 0 0; H 0 0 {bond}", basis="sto-3g", verbose=0)
mf = scf.RHF(mol).run()
c = mf.mo_coeff
h_spatial = c.T @ mf.get_hcore() @ c
eri = ao2mo.restore(1, ao2mo.kernel(mol, c), c.shape[1])

n = 2 * c.shape[1]
lines = [
    f"# H2 STO-3G, bond length {bond} A, RHF orbitals (pyscf {__import__('pyscf').__version__})",
    f"# RHF energy {mf.e_tot:.12f}",
    f"norb {n}",
    "convention physicist",
    f"nuc {mol.energy_nuc():.16e}",
]
for p in range(n):
    for q in range(n):
        if p % 2 == q % 2:
            v = h_spatial[p // 2, q // 2]
            if abs(v) > 1e-14:
                lines.append(f"h {p} {q} {v:.16e}")
for p in range(n):
    for q in range(n):
        for r in range(n):
            for s in range(n):
                if p % 2 == s % 2 and q % 2 == r % 2:
                    v = eri[p // 2, s // 2, q // 2, r // 2]
                    if abs(v) > 1e-14:
                        lines.append(f"g {p} {q} {r} {s} {v:.16e}")

out = Path(__file__).resolve().parent.parent / "crates/core/data/h2/h2_sto3g_0735.int"
out.write_text("\n".join(lines) + "\n")
print(f"wrote {out} ({len(lines)} lines)")
