"""Generate the rectangular H4 / STO-6G fixtures used by the molecular tests.

Writes AO-basis FCIDUMP files (h = T + V, chemist-order ERIs, nuclear repulsion
as the core energy) with a companion overlap file, plus reference energies
from PySCF in reference.json. Geometry: H atoms on a rectangle of sides d and
1.2 d (angstrom); the square is avoided because its RHF ground state is
degenerate.
"""

import argparse
import json
from pathlib import Path

import numpy as np
from pyscf import __version__ as pyscf_version
from pyscf import ao2mo, fci, gto, scf

DISTANCES = [0.8, 1.0, 1.2, 1.5, 1.8, 2.2]
ASPECT = 1.2


def geometry(d):
    w = ASPECT * d
    return [("H", (0.0, 0.0, 0.0)), ("H", (d, 0.0, 0.0)), ("H", (d, w, 0.0)), ("H", (0.0, w, 0.0))]


def write_fcidump(path, h1, eri, e_nuc, nelec):
    n = h1.shape[0]
    with open(path, "w") as f:
        f.write(f"&FCI NORB={n},NELEC={nelec},MS2=0,\n ORBSYM={'1,' * n}\n ISYM=1,\n &END\n")
        for i in range(n):
            for j in range(i + 1):
                for k in range(n):
                    for l in range(k + 1):
                        if i * (i + 1) // 2 + j < k * (k + 1) // 2 + l:
                            continue
                        v = eri[i, j, k, l]
                        if abs(v) > 1e-14:
                            f.write(f"{v:.17g} {i + 1} {j + 1} {k + 1} {l + 1}\n")
        for i in range(n):
            for j in range(i + 1):
                if abs(h1[i, j]) > 1e-14:
                    f.write(f"{h1[i, j]:.17g} {i + 1} {j + 1} 0 0\n")
        f.write(f"{e_nuc:.17g} 0 0 0 0\n")


def write_overlap(path, s):
    n = s.shape[0]
    with open(path, "w") as f:
        f.write(f"{n}\n")
        for i in range(n):
            f.write(" ".join(f"{x:.17g}" for x in s[i]) + "\n")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=str(Path(__file__).resolve().parents[2] / "tests" / "fixtures" / "h4"))
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    refs = {"generator": "tools/fixtures/make_h4_fixtures.py", "pyscf": pyscf_version, "basis": "sto-6g",
            "aspect": ASPECT, "units": "angstrom, hartree", "geometries": []}
    for d in DISTANCES:
        mol = gto.M(atom=geometry(d), basis="sto-6g", unit="Angstrom", verbose=0)
        h1 = mol.intor("int1e_kin") + mol.intor("int1e_nuc")
        s = mol.intor("int1e_ovlp")
        eri = ao2mo.restore(1, mol.intor("int2e"), mol.nao)
        stem = f"h4_d{d:.3f}"
        write_fcidump(out / f"{stem}.fcidump", h1, eri, mol.energy_nuc(), mol.nelectron)
        write_overlap(out / f"{stem}.overlap", s)
        mf = scf.RHF(mol).run(conv_tol=1e-12)
        e_fci = fci.FCI(mf).kernel()[0]
        refs["geometries"].append({"d": d, "file": f"{stem}.fcidump", "e_nuc": mol.energy_nuc(),
                                   "e_rhf": mf.e_tot, "e_fci": e_fci})
    (out / "reference.json").write_text(json.dumps(refs, indent=2) + "\n")


if __name__ == "__main__":
    main()
