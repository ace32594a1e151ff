#include "pairsim/closed_form.hpp"

#include <cmath>
#include <limits>

#include "pairsim/errors.hpp"
#include "pairsim/quadrature.hpp"

namespace pairsim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_time(double t) {
  if (std::isnan(t) || t < 0.0) throw DomainError("time must be >= 0");
}

}  // namespace

FineBalanceSolution::FineBalanceSolution(const ModelParams& params,
                                         const PopulationFractions& fractions)
    : params_(params), fractions_(fractions) {
  if (static_cast<int>(fractions.x.size()) != params.k)
    throw DimensionMismatch("fractions do not match the number of types");
  auto d = check_fine_balance(params);
  if (!d) throw NotFineBalance("rates do not split additively");
  decomp_ = *d;
}

FluidState FineBalanceSolution::eval(double t) const {
  require_time(t);
  if (std::isinf(t)) throw DomainError("time must be finite");
  const int k = params_.k;
  FluidState s;
  s.A.resize(k);
  s.B.resize(k);
  s.Q = Mat::square(k);
  double sa = 0.0, sb = 0.0;
  for (int i = 0; i < k; ++i) {
    s.A[i] = fractions_.x[i] * std::exp(-decomp_.alpha_bar[i] * t);
    sa += s.A[i];
    s.B[i] = fractions_.y[i] * std::exp(-decomp_.beta_bar[i] * t);
    sb += s.B[i];
  }
  for (int i = 0; i < k; ++i) {
    s.A[i] /= sa;
    s.B[i] /= sb;
  }
  s.Z = sa * sb;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      s.Q(i, j) = fractions_.x[i] * fractions_.y[j] * (-std::expm1(-params_.pi(i, j) * t));
  return s;
}

Mat FineBalanceSolution::pattern() const {
  const int k = params_.k;
  Mat q = Mat::square(k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) q(i, j) = fractions_.x[i] * fractions_.y[j];
  return q;
}

Sym2x2Solution::Sym2x2Solution(const ModelParams& params, const PopulationFractions& fractions)
    : params_(params), fractions_(fractions) {
  constants_ = sym2x2_reduce(params, fractions);
  if (constants_.case_tag == SymCase::FineBalance)
    throw FineBalanceExcluded("rates split additively; use FineBalanceSolution");
  pi11_ = params.pi(0, 0);
  pi12_ = params.pi(0, 1);
  pi22_ = params.pi(1, 1);
  delta_ = pi11_ + pi22_ - 2.0 * pi12_;
  x1_ = fractions.x[0];
  if (!(x1_ > 0.0 && x1_ < 1.0)) throw DomainError("x1 must lie strictly inside (0, 1)");
  if (constants_.gamma) gamma_ = *constants_.gamma;
  if (constants_.theta1) theta1_ = *constants_.theta1;
  if (constants_.theta2) theta2_ = *constants_.theta2;
  switch (constants_.case_tag) {
    case SymCase::GammaZero: {
      // Swap the two types; the swapped system has pi11 = pi12 and the
      // same Q_12 (profiles are symmetric across the sexes).
      Mat pr = Mat::square(2);
      pr(0, 0) = pi22_;
      pr(1, 1) = pi11_;
      pr(0, 1) = pr(1, 0) = pi12_;
      std::vector<double> xr{1.0 - x1_, x1_};
      relabeled_ = std::make_unique<Sym2x2Solution>(params_from_pi(pr), make_fractions(xr, xr));
      eq_.a1_inf = 1.0 - relabeled_->eq_.a1_inf;
      eq_.limit_inf = relabeled_->eq_.limit_inf;
      break;
    }
    case SymCase::GammaOne:
      if (pi22_ > pi12_) {
        eq_.a1_inf = 1.0;
        eq_.limit_inf = kInf;
      } else {
        eq_.a1_inf = 0.0;
        eq_.limit_inf = 0.0;
      }
      break;
    default:  // Generic
      if (std::abs(x1_ - gamma_) <= 1e-12) {
        at_fixed_point_ = true;
        eq_.a1_inf = x1_;
        eq_.limit_inf = std::numeric_limits<double>::quiet_NaN();
      } else if (pi11_ > pi12_ && pi22_ > pi12_) {
        eq_.a1_inf = gamma_;
        eq_.limit_inf = kInf;
      } else if (pi11_ < pi12_ && pi22_ < pi12_ && x1_ > gamma_) {
        eq_.a1_inf = 1.0;
        eq_.limit_inf = -(1.0 - x1_) / (1.0 - gamma_);
      } else if (pi11_ < pi12_ && pi22_ < pi12_) {
        eq_.a1_inf = 0.0;
        eq_.limit_inf = -x1_ / gamma_;
      } else if (pi11_ > pi12_) {  // pi22 < pi12: the first type dies out of the singles pool
        eq_.a1_inf = 0.0;
        eq_.limit_inf = -x1_ / gamma_;
      } else {  // pi11 < pi12 < pi22: the first type takes over the singles pool
        eq_.a1_inf = 1.0;
        eq_.limit_inf = -(1.0 - x1_) / (1.0 - gamma_);
      }
      break;
  }
}

// Log of the implicit orbit relation, normalized so its value at x1 is 0
// and it equals -pi12 t (generic) or (pi22 - pi12) t (pi11 = pi12) along
// the solution.
double Sym2x2Solution::orbit_log(double a) const {
  if (constants_.case_tag == SymCase::GammaOne)
    return std::log((1.0 - x1_) * a / (x1_ * (1.0 - a))) + 1.0 / (1.0 - a) - 1.0 / (1.0 - x1_);
  const double lr = std::log((a - gamma_) / (x1_ - gamma_));
  return theta1_ * (std::log(x1_ / a) + lr) + theta2_ * (std::log((1.0 - x1_) / (1.0 - a)) + lr);
}

double Sym2x2Solution::a1_of_t(double t) const {
  require_time(t);
  if (relabeled_) return 1.0 - relabeled_->a1_of_t(t);
  if (at_fixed_point_ || t == 0.0) return x1_;
  if (std::isinf(t)) return eq_.a1_inf;
  const double target =
      constants_.case_tag == SymCase::GammaOne ? (pi22_ - pi12_) * t : -pi12_ * t;
  // The residual orbit_log(a) - target is -target at the x1 end of the
  // orbit and diverges with the opposite sign at the equilibrium end, so a
  // plain bisection on midpoints never needs the (infinite) endpoint values.
  double a_near = x1_, a_far = eq_.a1_inf;
  const bool near_positive = target < 0.0;
  for (int it = 0; it < 100 && std::abs(a_far - a_near) > 1e-12; ++it) {
    double m = 0.5 * (a_near + a_far);
    double hm = orbit_log(m) - target;
    if ((hm > 0.0) == near_positive)
      a_near = m;
    else
      a_far = m;
  }
  return 0.5 * (a_near + a_far);
}

double Sym2x2Solution::z_of_a1(double a1) const {
  if (relabeled_) return relabeled_->z_of_a1(1.0 - a1);
  if (at_fixed_point_)
    throw DomainError("A_1 is pinned at gamma; the singles fraction depends on t only");
  if (!(a1 > 0.0 && a1 < 1.0)) throw DomainError("a1 must lie in (0, 1)");
  double lz;
  if (constants_.case_tag == SymCase::GammaOne) {
    lz = theta1_ * std::log((1.0 - a1) / (1.0 - x1_)) - (theta1_ + 1.0) * std::log(a1 / x1_) -
         theta1_ * (1.0 / (1.0 - a1) - 1.0 / (1.0 - x1_));
  } else {
    const double r = (a1 - gamma_) / (x1_ - gamma_);
    if (!(r > 0.0)) throw DomainError("a1 must lie on the same side of gamma as x1");
    lz = -(theta1_ + 1.0) * std::log(a1 / x1_) - (theta2_ + 1.0) * std::log((1.0 - a1) / (1.0 - x1_)) +
         (theta1_ + theta2_ + 1.0) * std::log(r);
  }
  const double z = std::exp(lz);
  if (!std::isfinite(z)) throw DomainError("a1 is too far off the orbit through x1");
  return z;
}

double Sym2x2Solution::z_of_t(double t) const {
  require_time(t);
  if (relabeled_) return relabeled_->z_of_t(t);
  if (at_fixed_point_) return std::exp(-(pi12_ * x1_ + pi22_ * (1.0 - x1_)) * t);
  if (std::isinf(t)) return 0.0;
  return z_of_a1(a1_of_t(t));
}

// Integrand of the pattern integral in the substitution variable
// y = (x1 - a)/(a - gamma); both bases stay positive strictly inside the
// orbit and the exponent paired with a vanishing base is positive, so the
// endpoint value is 0.
double Sym2x2Solution::generic_integrand(double y) const {
  const double b1 = 1.0 + gamma_ * y / x1_;
  const double b2 = 1.0 + (1.0 - gamma_) * y / (1.0 - x1_);
  if (b1 <= 0.0 || b2 <= 0.0) return 0.0;
  return std::exp(-(theta1_ + 1.0) * std::log(b1) - (theta2_ + 1.0) * std::log(b2));
}

// Integrand in w = (1-x1) a / (x1 (1-a)) for the pi11 = pi12 case.
double Sym2x2Solution::gamma_one_integrand(double w) const {
  if (w <= 0.0) return 0.0;
  const double c = x1_ / (1.0 - x1_);
  return std::exp(-(theta1_ + 1.0) * std::log(w) + c * theta1_ * (1.0 - w));
}

double Sym2x2Solution::q12_from_limit(double limit) const {
  if (constants_.case_tag == SymCase::GammaOne) {
    auto f = [this](double w) { return gamma_one_integrand(w); };
    const double integral =
        std::isinf(limit) ? quad::exp_sinh(f, 1.0) : quad::tanh_sinh(f, 1.0, limit);
    return x1_ * theta1_ * integral;
  }
  auto f = [this](double y) { return generic_integrand(y); };
  const double integral =
      std::isinf(limit) ? quad::exp_sinh(f, 0.0) : quad::tanh_sinh(f, 0.0, limit);
  return pi12_ / delta_ * integral;
}

double Sym2x2Solution::q12_of_t(double t) const {
  require_time(t);
  if (relabeled_) return relabeled_->q12_of_t(t);
  if (at_fixed_point_) {
    const double rate = pi12_ * x1_ + pi22_ * (1.0 - x1_);
    return pi12_ * x1_ * (1.0 - x1_) / rate * (-std::expm1(-rate * t));
  }
  if (t == 0.0) return 0.0;
  if (std::isinf(t)) return q12_from_limit(eq_.limit_inf);
  const double a = a1_of_t(t);
  const double limit = constants_.case_tag == SymCase::GammaOne
                           ? (1.0 - x1_) * a / (x1_ * (1.0 - a))
                           : (x1_ - a) / (a - gamma_);
  return q12_from_limit(limit);
}

double Sym2x2Solution::q12_infinity() const {
  if (relabeled_) return relabeled_->q12_infinity();
  if (at_fixed_point_)
    return pi12_ * x1_ * (1.0 - x1_) / (pi12_ * x1_ + pi22_ * (1.0 - x1_));
  return q12_from_limit(eq_.limit_inf);
}

Mat Sym2x2Solution::pattern() const {
  const double q12 = q12_infinity();
  Mat q = Mat::square(2);
  q(0, 1) = q(1, 0) = q12;
  q(0, 0) = x1_ - q12;
  q(1, 1) = (1.0 - x1_) - q12;
  return q;
}

MatingClass Sym2x2Solution::mating_class() const { return classify_2x2(params_); }

}  // namespace pairsim
