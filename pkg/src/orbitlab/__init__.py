"""orbitlab: a desk-scale laboratory for orbit compactness of
power-bounded operators.

Modules:
  seqspace   certified vectors in c/c0 and finite vectors
  operators  diagonal and matrix operators, words, telescoping expansion
  orbits     orbit clouds and packing/covering compactness diagnostics
  ergodic    Cesaro means, mean-ergodic projections and verdicts
  jdlg       reversible/stable splitting, peripheral-spectrum criteria
  gallery    counterexample operators, c0-witness ladder, ladder test
  cli        deterministic command-line front end

All public values are immutable after construction and all operations
are pure, so concurrent evaluation from multiple workers is safe.
"""

from .seqspace import (TailCertificate, SeqVector, FiniteVector, NormResult,
                       sup_norm, lin_comb, distance, constant_one,
                       zero_vector, basis_vector, from_prefix)
from .operators import (DiagonalSymbol, DiagonalOperator, MatrixOperator,
                        OperatorWord, CommutingFamily, harmonic_symbol,
                        root_perturbed_symbol, constant_symbol, apply,
                        power_apply, telescope_expand, commutation_defect,
                        power_bound_estimate, make_commuting_family,
                        read_matrix_file, write_matrix_file)
from .orbits import (OrbitCloud, CompactnessReport, orbit, difference_orbit,
                     orbit_family, packing_number, covering_estimate,
                     compactness_diagnostic, difference_compactness_diagnostic,
                     cloud_diagnostic)
from .ergodic import (cesaro, mean_ergodic_projection, fix_separation_check,
                      diagonal_mean_ergodic_verdict, decomposition_check,
                      certify_power_bounded)
from .jdlg import (jdlg_split, ktz_check, countable_peripheral_check,
                   half_sum, diagonal_jdlg, spectrum_report)
from .gallery import (SymbolFamily, WitnessAudit, limit_one_operator,
                      root_limit_operator, one_minus_symbol_vector,
                      c0_witness, bp_test, write_certificate,
                      verify_certificate)
from . import errors

__version__ = "0.1.0"
