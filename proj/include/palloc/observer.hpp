#pragma once

// Internal model of a constant-plus-sinusoids observation disturbance and the
// Luenberger-type observer that estimates it.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <complex>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "palloc/error.hpp"

namespace palloc {

/// S = diag(0, [0 w1; -w1 0], ...), D = [1, 1, 0, ..., 1, 0] and
/// D_eps = [0, 1, 0, ..., 1, 0] (D with the constant-state entry cleared).
class Exosystem {
 public:
  static Exosystem build(std::vector<double> freqs) {
    for (std::size_t k = 0; k < freqs.size(); ++k) {
      if (!(freqs[k] > 0.0) || !std::isfinite(freqs[k])) {
        throw Error(ErrorKind::invalid_frequency, "frequencies must be finite and positive");
      }
      for (std::size_t j = 0; j < k; ++j) {
        if (freqs[j] == freqs[k]) {
          throw Error(ErrorKind::invalid_frequency, "duplicate frequency " + std::to_string(freqs[k]));
        }
      }
    }
    const int n = 2 * static_cast<int>(freqs.size()) + 1;
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n, n);
    Eigen::RowVectorXd D = Eigen::RowVectorXd::Zero(n);
    D(0) = 1.0;
    for (std::size_t k = 0; k < freqs.size(); ++k) {
      const int i = 1 + 2 * static_cast<int>(k);
      S(i, i + 1) = freqs[k];
      S(i + 1, i) = -freqs[k];
      D(i) = 1.0;
    }
    Eigen::RowVectorXd D_eps = D;
    D_eps(0) = 0.0;
    return Exosystem(std::move(freqs), std::move(S), std::move(D), std::move(D_eps));
  }

  /// Skips every consistency check. Exists so tests can build pairs the
  /// regular constructor refuses (e.g. repeated oscillator blocks).
  static Exosystem unchecked(Eigen::MatrixXd S, Eigen::RowVectorXd D, Eigen::RowVectorXd D_eps) {
    return Exosystem({}, std::move(S), std::move(D), std::move(D_eps));
  }

  int dim() const { return static_cast<int>(S_.rows()); }
  int sinusoid_count() const { return static_cast<int>(freqs_.size()); }
  const std::vector<double>& freqs() const { return freqs_; }
  const Eigen::MatrixXd& S() const { return S_; }
  const Eigen::RowVectorXd& D() const { return D_; }
  const Eigen::RowVectorXd& D_eps() const { return D_eps_; }

 private:
  Exosystem(std::vector<double> freqs, Eigen::MatrixXd S, Eigen::RowVectorXd D, Eigen::RowVectorXd D_eps)
      : freqs_(std::move(freqs)), S_(std::move(S)), D_(std::move(D)), D_eps_(std::move(D_eps)) {}

  std::vector<double> freqs_;
  Eigen::MatrixXd S_;
  Eigen::RowVectorXd D_;
  Eigen::RowVectorXd D_eps_;
};

inline Exosystem build_exosystem(std::vector<double> freqs) { return Exosystem::build(std::move(freqs)); }

/// Max real part of the spectrum.
inline double spectral_abscissa(const Eigen::MatrixXd& A) {
  if (A.rows() != A.cols()) throw Error(ErrorKind::invalid_dimension, "matrix is not square");
  Eigen::EigenSolver<Eigen::MatrixXd> es(A, false);
  return es.eigenvalues().real().maxCoeff();
}

inline bool is_hurwitz(const Eigen::MatrixXd& A) { return spectral_abscissa(A) < -1e-9; }

/// Numerical rank via SVD, threshold 1e-9 relative to the largest singular value.
inline int numerical_rank(const Eigen::MatrixXcd& M) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  const double tol = 1e-9 * std::max<double>(1.0, sv(0));
  int rank = 0;
  for (Eigen::Index k = 0; k < sv.size(); ++k) rank += sv(k) > tol ? 1 : 0;
  return rank;
}

/// PBH test: rank [S^T - lambda I, D^T] == dim for every eigenvalue lambda of S.
inline bool observability_check(const Exosystem& e) {
  const int n = e.dim();
  Eigen::EigenSolver<Eigen::MatrixXd> es(e.S(), false);
  const Eigen::VectorXcd lambdas = es.eigenvalues();
  Eigen::MatrixXcd M(n, n + 1);
  for (Eigen::Index k = 0; k < lambdas.size(); ++k) {
    M.leftCols(n) = e.S().transpose().cast<std::complex<double>>();
    M.leftCols(n).diagonal().array() -= lambdas(k);
    M.col(n) = e.D().transpose().cast<std::complex<double>>();
    if (numerical_rank(M) < n) return false;
  }
  return true;
}

struct ObserverGain {
  Eigen::VectorXd L;
  Eigen::MatrixXd closed_loop;  ///< S - L D
  double spectral_abscissa;
};

inline ObserverGain make_gain(const Exosystem& e, Eigen::VectorXd L) {
  if (L.size() != e.dim()) {
    throw Error(ErrorKind::invalid_dimension, "observer gain length " + std::to_string(L.size()) +
                                                  " does not match model dimension " + std::to_string(e.dim()));
  }
  ObserverGain g;
  g.closed_loop = e.S() - L * e.D();
  g.spectral_abscissa = spectral_abscissa(g.closed_loop);
  g.L = std::move(L);
  return g;
}

/// Real coefficients (highest power first, monic) of prod (s - p_k).
inline std::vector<double> monic_polynomial(std::span<const std::complex<double>> poles) {
  std::vector<std::complex<double>> c{1.0};
  for (const auto& p : poles) {
    std::vector<std::complex<double>> next(c.size() + 1, 0.0);
    for (std::size_t k = 0; k < c.size(); ++k) {
      next[k] += c[k];
      next[k + 1] -= p * c[k];
    }
    c = std::move(next);
  }
  std::vector<double> out(c.size());
  std::transform(c.begin(), c.end(), out.begin(), [](const auto& z) { return z.real(); });
  return out;
}

inline void validate_poles(std::span<const std::complex<double>> poles, int dim) {
  if (static_cast<int>(poles.size()) != dim) {
    throw Error(ErrorKind::invalid_poles,
                "expected " + std::to_string(dim) + " poles, got " + std::to_string(poles.size()));
  }
  std::vector<bool> used(poles.size(), false);
  for (std::size_t k = 0; k < poles.size(); ++k) {
    const auto p = poles[k];
    if (!std::isfinite(p.real()) || !std::isfinite(p.imag()) || !(p.real() < 0.0)) {
      throw Error(ErrorKind::invalid_poles, "poles need finite negative real parts");
    }
    if (used[k]) continue;
    if (p.imag() == 0.0) {
      used[k] = true;
      continue;
    }
    bool paired = false;
    for (std::size_t j = k + 1; j < poles.size(); ++j) {
      if (!used[j] && poles[j] == std::conj(p)) {
        used[j] = used[k] = paired = true;
        break;
      }
    }
    if (!paired) throw Error(ErrorKind::invalid_poles, "pole list is not closed under conjugation");
  }
}

/// Ackermann's formula on the dual pair (S^T, D^T): the returned L places the
/// spectrum of S - L D at `poles`.
inline ObserverGain design_gain(const Exosystem& e, std::span<const std::complex<double>> poles) {
  const int n = e.dim();
  validate_poles(poles, n);
  if (!observability_check(e)) {
    throw Error(ErrorKind::design_infeasible, "(S, D) is not observable");
  }
  const Eigen::MatrixXd A = e.S().transpose();
  const Eigen::VectorXd B = e.D().transpose();
  Eigen::MatrixXd C(n, n);
  C.col(0) = B;
  for (int k = 1; k < n; ++k) C.col(k) = A * C.col(k - 1);

  const std::vector<double> coeffs = monic_polynomial(poles);
  // Horner evaluation of the desired characteristic polynomial at A.
  Eigen::MatrixXd pA = Eigen::MatrixXd::Identity(n, n) * coeffs[0];
  for (std::size_t k = 1; k < coeffs.size(); ++k) {
    pA = pA * A + coeffs[k] * Eigen::MatrixXd::Identity(n, n);
  }
  const Eigen::RowVectorXd last = Eigen::RowVectorXd::Unit(n, n - 1);
  // K = e_n^T C^{-1} p(A), i.e. K = w^T p(A) with C^T w = e_n.
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(C.transpose());
  if (!lu.isInvertible()) throw Error(ErrorKind::design_infeasible, "observability matrix is singular");
  const Eigen::VectorXd w = lu.solve(last.transpose());
  const Eigen::RowVectorXd K = w.transpose() * pA;
  return make_gain(e, K.transpose());
}

/// -5 for the constant mode; oscillator pairs at -5 +/- 0.1 j, -5 +/- 0.2 j, ...
inline std::vector<std::complex<double>> default_poles(int dim) {
  std::vector<std::complex<double>> poles{{-5.0, 0.0}};
  for (int k = 1; 2 * k <= dim - 1; ++k) {
    poles.emplace_back(-5.0, 0.1 * k);
    poles.emplace_back(-5.0, -0.1 * k);
  }
  return poles;
}

inline std::vector<std::complex<double>> closed_loop_poles(const ObserverGain& g) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(g.closed_loop, false);
  std::vector<std::complex<double>> out(static_cast<std::size_t>(es.eigenvalues().size()));
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) out[static_cast<std::size_t>(k)] = es.eigenvalues()(k);
  return out;
}

/// Greedy nearest matching of two pole sets; returns the worst distance.
inline double pole_mismatch(std::vector<std::complex<double>> got, std::span<const std::complex<double>> want) {
  if (got.size() != want.size()) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (const auto& w : want) {
    auto best = std::min_element(got.begin(), got.end(),
                                 [&](const auto& a, const auto& b) { return std::abs(a - w) < std::abs(b - w); });
    worst = std::max(worst, std::abs(*best - w));
    got.erase(best);
  }
  return worst;
}

}  // namespace palloc
