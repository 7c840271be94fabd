"""Learned basis functions for 3D sound speed fields.

Tucker bases (HOOI and its multi-snapshot variant) next to the classical
EOF, Fourier + EOF and K-SVD representations, with a synthetic field
generator and an equal-budget benchmark.
"""
from .classical import (
    EofBasis,
    FourierEofBasis,
    eof_decode,
    eof_encode,
    fourier_eof_decode,
    fourier_eof_encode,
    learn_eof,
    learn_fourier_eof,
)
from .errors import ConfigError, DomainError, NumericError, ParseError, SsfBasisError
from .ksvd import KsvdDictionary, SparseCode, ksvd_decode, ksvd_encode, ksvd_learn, omp
from .synth import SsfGrid, SynthParams, build_dataset, build_multiseason_dataset, generate_snapshot
from .tensor import fold, mode_product, unfold
from .tucker import MultilinearRank, TuckerBasis, hooi, mhooi, tucker_decode, tucker_encode

__version__ = "0.1.0"
