#include "mcflow/nonlinearity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mcflow {

double truncate(double k, double s) { return std::max(-k, std::min(s, k)); }

double excess(double k, double s) { return s - truncate(k, s); }

double v_delta(double delta, double s) {
    if (!(delta > 0.0)) throw std::invalid_argument("v_delta: delta must be positive");
    if (s < 0.0) throw std::domain_error("v_delta: defined for s >= 0");
    if (s <= delta) return 1.0;
    if (s >= 2.0 * delta) return 0.0;
    return (2.0 * delta - s) / delta;
}

NonlinearTerm NonlinearTerm::identity_one() {
    NonlinearTerm h;
    h.kind_ = Kind::IdentityOne;
    h.h_infinity_ = 1.0;
    h.gamma_ = 0.0;
    h.sigma_ = 1.0;
    return h;
}

NonlinearTerm NonlinearTerm::rational(double a, double b) {
    if (!(a > 0.0) || !(b > 0.0))
        throw std::invalid_argument("NonlinearTerm::rational: a, b must be positive (h(0) != 0)");
    NonlinearTerm h;
    h.kind_ = Kind::Rational;
    h.a_ = a;
    h.b_ = b;
    h.gamma_ = 0.0;
    h.sigma_ = 1.0;
    h.h_infinity_ = 0.0;
    h.c1_ = a / b;  // h is bounded by h(0) everywhere
    return h;
}

NonlinearTerm NonlinearTerm::singular_power(double c1, double gamma, double offset, double s1) {
    if (!(c1 > 0.0) || !(gamma > 0.0) || !(s1 > 0.0))
        throw std::invalid_argument("NonlinearTerm::singular_power: c1, gamma, s1 must be positive");
    if (offset < 0.0) throw std::invalid_argument("NonlinearTerm::singular_power: offset must be >= 0");
    NonlinearTerm h;
    h.kind_ = Kind::SingularPower;
    h.singular_ = true;
    h.gamma_ = gamma;
    h.offset_ = offset;
    h.s1_ = s1;
    // declared constant of the near-zero bound h(s) <= c1'/s^gamma on (0, s1]
    h.c1_ = c1 + offset * std::pow(s1, gamma);
    h.base_c1_ = c1;
    h.sigma_ = std::max(1.0, gamma);
    h.h_infinity_ = offset;
    return h;
}

NonlinearTerm NonlinearTerm::table(std::vector<double> s, std::vector<double> h_vals,
                                   double tail_value) {
    if (s.size() != h_vals.size() || s.size() < 2)
        throw std::invalid_argument("NonlinearTerm::table: need matching samples (>= 2)");
    if (s.front() != 0.0)
        throw std::invalid_argument("NonlinearTerm::table: samples must start at s = 0");
    for (std::size_t i = 1; i < s.size(); ++i)
        if (!(s[i] > s[i - 1])) throw std::invalid_argument("NonlinearTerm::table: s not increasing");
    for (double v : h_vals)
        if (!(v >= 0.0) || !std::isfinite(v))
            throw std::invalid_argument("NonlinearTerm::table: h must be finite and nonnegative");
    if (h_vals.front() == 0.0)
        throw std::invalid_argument("NonlinearTerm::table: h(0) = 0 is outside the admissible class");
    if (!(tail_value >= 0.0) || !std::isfinite(tail_value))
        throw std::invalid_argument("NonlinearTerm::table: tail value must be finite");
    NonlinearTerm h;
    h.kind_ = Kind::Table;
    h.tab_s_ = std::move(s);
    h.tab_h_ = std::move(h_vals);
    h.tab_tail_ = tail_value;
    h.h_infinity_ = tail_value;
    h.gamma_ = 0.0;
    h.sigma_ = 1.0;
    h.c1_ = *std::max_element(h.tab_h_.begin(), h.tab_h_.end());
    return h;
}

double NonlinearTerm::operator()(double s) const {
    if (s < 0.0) throw std::domain_error("NonlinearTerm: evaluated at s < 0");
    switch (kind_) {
        case Kind::IdentityOne:
            return 1.0;
        case Kind::Rational:
            return a_ / (b_ + s);
        case Kind::SingularPower:
            if (s == 0.0) throw std::domain_error("NonlinearTerm: singular h evaluated at s = 0");
            return base_c1_ * std::pow(s, -gamma_) + offset_;
        case Kind::Table: {
            if (s >= tab_s_.back()) return tab_tail_;
            const auto it = std::upper_bound(tab_s_.begin(), tab_s_.end(), s);
            const std::size_t j = static_cast<std::size_t>(it - tab_s_.begin());
            const double t = (s - tab_s_[j - 1]) / (tab_s_[j] - tab_s_[j - 1]);
            return (1.0 - t) * tab_h_[j - 1] + t * tab_h_[j];
        }
    }
    return 0.0;
}

double NonlinearTerm::hp(double p, double s) const {
    if (!(p > 1.0) || !(p <= 2.0)) throw std::invalid_argument("hp: p must lie in (1, 2]");
    const double cap = 1.0 / (p - 1.0);
    if (singular_ && s == 0.0) return cap;
    return std::min((*this)(s), cap);
}

double NonlinearTerm::tail_sup(double k) const {
    if (!(k > 0.0)) throw std::invalid_argument("tail_sup: k must be positive");
    switch (kind_) {
        case Kind::IdentityOne:
            return 1.0;
        case Kind::Rational:
            return a_ / (b_ + k);  // decreasing
        case Kind::SingularPower:
            return base_c1_ * std::pow(k, -gamma_) + offset_;  // decreasing
        case Kind::Table: {
            double m = tab_tail_;
            for (std::size_t i = 0; i < tab_s_.size(); ++i)
                if (tab_s_[i] >= k) m = std::max(m, tab_h_[i]);
            // value at k itself when k falls between samples
            if (k < tab_s_.back()) m = std::max(m, (*this)(k));
            return m;
        }
    }
    return 0.0;
}

bool NonlinearTerm::nonincreasing() const {
    switch (kind_) {
        case Kind::IdentityOne:
        case Kind::Rational:
        case Kind::SingularPower:
            return true;
        case Kind::Table:
            for (std::size_t i = 1; i < tab_h_.size(); ++i)
                if (tab_h_[i] > tab_h_[i - 1] + 1e-15) return false;
            return tab_tail_ <= tab_h_.back() + 1e-15;
    }
    return false;
}

std::string NonlinearTerm::kind_name() const {
    switch (kind_) {
        case Kind::IdentityOne: return "one";
        case Kind::Rational: return "rational";
        case Kind::SingularPower: return "power";
        case Kind::Table: return "table";
    }
    return "?";
}

}  // namespace mcflow
