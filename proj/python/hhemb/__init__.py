from ._hhemb import (
    HhembError,
    __version__,
    block_householder,
    build_h1,
    filling_from_mu,
    htdmfet_lattice,
    hubbard_fci,
    lpfet,
    meanfield_rdm,
    molecule,
    read_fcidump,
    run_cli,
    subspace_distance,
    svd_bath,
)

__all__ = [
    "HhembError",
    "__version__",
    "block_householder",
    "build_h1",
    "filling_from_mu",
    "htdmfet_lattice",
    "hubbard_fci",
    "lpfet",
    "meanfield_rdm",
    "molecule",
    "read_fcidump",
    "run_cli",
    "subspace_distance",
    "svd_bath",
]
