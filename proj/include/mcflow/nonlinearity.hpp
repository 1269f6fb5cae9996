#pragma once

#include <string>
#include <vector>

namespace mcflow {

/// T_k(s) = max(-k, min(s, k))
double truncate(double k, double s);

/// G_k(s) = s - T_k(s)
double excess(double k, double s);

/// V_delta: 1 on [0, delta], (2 delta - s)/delta on (delta, 2 delta), 0 beyond.
double v_delta(double delta, double s);

/// The lower-order term h: [0, inf) -> [0, inf], continuous and finite
/// outside the origin, with h(s) <= c1 / s^gamma near zero and a finite
/// tail limsup h(infinity). sigma = max(1, gamma).
///
/// Variants: the constant 1, the bounded rational a/(b+s), the (possibly
/// singular) power c1 s^{-gamma} + offset, and a sampled table with a
/// declared tail value. h with h(0) = 0 is rejected.
class NonlinearTerm {
public:
    enum class Kind { IdentityOne, Rational, SingularPower, Table };

    static NonlinearTerm identity_one();
    static NonlinearTerm rational(double a, double b);
    static NonlinearTerm singular_power(double c1, double gamma, double offset = 0.0,
                                        double s1 = 1.0);
    static NonlinearTerm table(std::vector<double> s, std::vector<double> h, double tail_value);

    /// h(s). Throws std::domain_error for s < 0 (a negative iterate is a
    /// solver bug) and for s = 0 when h is singular there.
    double operator()(double s) const;

    /// h_p(s) = T_{1/(p-1)}(h(s)); at s = 0 a singular h returns the cap.
    double hp(double p, double s) const;

    /// h_k(infinity) = sup over [k, infinity).
    double tail_sup(double k) const;

    double h_infinity() const { return h_infinity_; }
    double sigma() const { return sigma_; }
    double c1() const { return c1_; }
    double gamma() const { return gamma_; }
    double s1() const { return s1_; }
    Kind kind() const { return kind_; }
    bool singular_at_zero() const { return singular_; }
    bool nonincreasing() const;
    std::string kind_name() const;

private:
    NonlinearTerm() = default;

    Kind kind_ = Kind::IdentityOne;
    bool singular_ = false;
    double c1_ = 1.0, gamma_ = 0.0, s1_ = 1.0, offset_ = 0.0;
    double base_c1_ = 1.0;  // coefficient of the power part itself
    double a_ = 1.0, b_ = 1.0;
    double h_infinity_ = 1.0;
    double sigma_ = 1.0;
    std::vector<double> tab_s_, tab_h_;
    double tab_tail_ = 0.0;
};

}  // namespace mcflow
