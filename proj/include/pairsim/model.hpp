#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pairsim/matrix.hpp"

namespace pairsim {

/// Encounter-mating parameters for k female and k male types. Females of
/// type i fire at rate alpha_i, males of type j at rate beta_j, and a firing
/// that selects an (i, j) pair mates with probability p_ij. Only the combined
/// rates pi_ij = p_ij (alpha_i + beta_j) enter the dynamics.
struct ModelParams {
  int k = 0;
  std::vector<double> alpha, beta;
  Mat p;   // acceptance probabilities, entries in (0, 1]
  Mat pi;  // pi_ij = p_ij * (alpha_i + beta_j), entries > 0
};

/// Validates shapes and ranges and fills in pi.
/// Throws DimensionMismatch, InvalidProbability, DegenerateRate.
ModelParams build_params(const std::vector<double>& alpha, const std::vector<double>& beta,
                         const Mat& p);

/// Wraps a bare positive rate matrix as ModelParams. Realized as alpha = 0,
/// beta_j = max_i pi_ij, p_ij = pi_ij / beta_j, which reproduces pi exactly.
ModelParams params_from_pi(const Mat& pi);

/// Finite population: n females and n males with integer type counts.
struct PopulationCounts {
  long n = 0;
  std::vector<long> x, y;  // each sums to n
};

PopulationCounts make_counts(const std::vector<long>& x, const std::vector<long>& y);

/// Limiting type fractions; each vector sums to 1 (tolerance 1e-12).
struct PopulationFractions {
  std::vector<double> x, y;
};

PopulationFractions make_fractions(const std::vector<double>& x, const std::vector<double>& y);

/// Integer population of size n closest to the given fractions: floor the
/// scaled values, then hand out the shortfall to the largest remainders,
/// breaking ties toward the lowest index.
PopulationCounts round_fractions(const PopulationFractions& fractions, long n);

/// Additive split pi_ij = alpha_bar_i + beta_bar_j, normalized so that
/// min_i alpha_bar_i = 0.
struct FineBalanceDecomposition {
  std::vector<double> alpha_bar, beta_bar;
};

/// Tests the quadruple identity pi_ij + pi_i'j' = pi_ij' + pi_i'j (all pairs)
/// within rtol * max pi. On success returns the decomposition with gauge
/// alpha_bar_i = pi_i1 - min_i' pi_i'1 and beta_bar_j = pi_{i*,j} for a row
/// i* attaining that minimum.
std::optional<FineBalanceDecomposition> check_fine_balance(const ModelParams& params,
                                                           double rtol = 1e-9);

enum class SymCase { FineBalance, GammaOne, GammaZero, Generic };

const char* to_string(SymCase c);

/// Reduced constants of the symmetric 2x2 system. gamma is the interior
/// fixed point (pi22 - pi12) / (pi11 + pi22 - 2 pi12) when the denominator
/// is nonzero; theta1 = pi12 / (pi22 - pi12) and theta2 = pi12 / (pi11 - pi12)
/// when their denominators are nonzero.
struct Sym2x2Params {
  SymCase case_tag = SymCase::Generic;
  std::optional<double> gamma, theta1, theta2;
};

/// Requires k = 2, pi symmetric, and x = y (tolerance 1e-12 on fractions,
/// 1e-9 * max pi on pi). Throws NotTwoByTwo, SymmetryViolation.
Sym2x2Params sym2x2_reduce(const ModelParams& params, const PopulationFractions& fractions);

enum class MatingClass { Heterogamous, Panmictic, Homogamous };

const char* to_string(MatingClass c);

/// Sign of pi11 + pi22 - 2 pi12 (tolerance 1e-9 * max pi) for a symmetric
/// 2x2 parameter set: negative = heterogamous, zero = panmictic,
/// positive = homogamous.
MatingClass classify_2x2(const ModelParams& params);

/// True when every entry of M lies in the continuous constraint set: entries
/// nonnegative, row sums <= x_i + tol, column sums <= y_j + tol.
bool in_state_space(const Mat& m, const PopulationFractions& fractions, double tol = 1e-9);

}  // namespace pairsim
