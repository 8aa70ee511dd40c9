#pragma once
#include <stdexcept>

namespace bnq {

// Dirichlet prior scheme for Bayesian-Dirichlet scores and posterior-mean CPTs.
// K2 sets alpha_ijk = 1; BDeu sets alpha_ijk = ess / (q_i * r_i).
struct PriorScheme {
  enum class Kind { K2, BDeu };
  Kind kind = Kind::K2;
  double ess = 1.0;

  static PriorScheme k2() { return {Kind::K2, 1.0}; }
  static PriorScheme bdeu(double ess) { return {Kind::BDeu, ess}; }

  double alpha_ijk(int q, int r) const {
    if (kind == Kind::K2) return 1.0;
    if (ess <= 0.0) throw std::invalid_argument("BDeu requires ess > 0");
    return ess / (static_cast<double>(q) * r);
  }

  double alpha_ij(int q, int r) const {
    if (kind == Kind::K2) return static_cast<double>(r);
    if (ess <= 0.0) throw std::invalid_argument("BDeu requires ess > 0");
    return ess / static_cast<double>(q);
  }
};

}  // namespace bnq
