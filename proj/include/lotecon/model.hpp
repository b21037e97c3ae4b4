#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "lotecon/params.hpp"

namespace lotecon {

struct Prices {
    double r = 0.0;  // risk-free rate per period
    double w = 0.0;  // wage per efficiency unit

    void validate(double delta) const {
        if (!(r > -delta)) throw ValidationError("prices: r must exceed -delta");
        if (!(w > 0.0)) throw ValidationError("prices: w must be > 0");
    }
};

// CES utility, u(c) = c^(1-sigma)/(1-sigma), with log utility at sigma = 1.
inline double utility(double c, const Preferences& prefs) {
    if (!(c > 0.0)) throw std::domain_error("utility: consumption must be > 0");
    if (prefs.sigma == 1.0) return std::log(c);
    if (prefs.sigma == 2.0) return -1.0 / c;  // common calibration, avoids pow
    return std::pow(c, 1.0 - prefs.sigma) / (1.0 - prefs.sigma);
}

// y = theta * (k^alpha l^(1-alpha))^v
inline double entrepreneur_output(double k, double l, double theta, const Technology& tech) {
    if (k < 0.0 || l < 0.0 || theta < 0.0)
        throw std::domain_error("entrepreneur_output: inputs must be >= 0");
    if (theta == 0.0 || k == 0.0 || l == 0.0) return 0.0;
    return theta * std::pow(std::pow(k, tech.alpha) * std::pow(l, 1.0 - tech.alpha), tech.v);
}

// Y = A K^alpha L^(1-alpha)
inline double corporate_output(double K, double L, const Technology& tech) {
    if (K < 0.0 || L < 0.0) throw std::domain_error("corporate_output: inputs must be >= 0");
    if (K == 0.0 || L == 0.0) return 0.0;
    return tech.A * std::pow(K, tech.alpha) * std::pow(L, 1.0 - tech.alpha);
}

// T(I) = a0*{I - (I^(-a1) + a2)^(-1/a1)} + tau_I*I, on clamped income
// max{I, 0}. T(0) = 0 and T is continuous at zero.
inline double income_tax(double income, const TaxSystem& tax) {
    double I = income > 0.0 ? income : 0.0;
    if (I == 0.0) return 0.0;
    double shielded = std::pow(std::pow(I, -tax.a1) + tax.a2, -1.0 / tax.a1);
    return tax.a0 * (I - shielded) + tax.tau_I * I;
}

// Marginal productivity conditions of the corporate sector:
// r = alpha A x^(alpha-1) - delta, w = (1-alpha) A x^alpha, x = K/L.
inline Prices factor_prices(double k_over_l, const Technology& tech) {
    if (!(k_over_l > 0.0)) throw std::domain_error("factor_prices: K/L must be > 0");
    Prices p;
    p.r = tech.alpha * tech.A * std::pow(k_over_l, tech.alpha - 1.0) - tech.delta;
    p.w = (1.0 - tech.alpha) * tech.A * std::pow(k_over_l, tech.alpha);
    return p;
}

// Inverse of the r-condition above.
inline double kl_ratio_for_rate(double r, const Technology& tech) {
    if (!(r + tech.delta > 0.0)) throw std::domain_error("kl_ratio_for_rate: r + delta must be > 0");
    return std::pow((r + tech.delta) / (tech.alpha * tech.A), 1.0 / (tech.alpha - 1.0));
}

// Rescales TFP so the wage condition holds at (target_w, r).
inline double calibrate_tfp_for_wage(double target_w, double r, Technology tech) {
    if (!(target_w > 0.0)) throw std::domain_error("calibrate_tfp_for_wage: wage must be > 0");
    // x = alpha/(1-alpha) * w/(r+delta) pins the ratio; A follows from the wage condition.
    double x = tech.alpha / (1.0 - tech.alpha) * target_w / (r + tech.delta);
    return target_w / ((1.0 - tech.alpha) * std::pow(x, tech.alpha));
}

// Left fixed point pi = pi P by power iteration.
inline std::vector<double> stationary_distribution(const MarkovChain& chain,
                                                   double tol = 1e-13, int max_iter = 1000000) {
    chain.validate();
    int n = chain.size();
    std::vector<double> pi(n, 1.0 / n), next(n);
    for (int it = 0; it < max_iter; ++it) {
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += pi[i] * chain.P[i][j];
            next[j] = s;
        }
        double diff = 0.0;
        for (int j = 0; j < n; ++j) diff = std::max(diff, std::fabs(next[j] - pi[j]));
        pi.swap(next);
        if (diff < tol) {
            double sum = 0.0;
            for (double x : pi) sum += x;
            for (double& x : pi) x /= sum;
            return pi;
        }
    }
    throw ConvergenceError("stationary_distribution did not converge", 0.0);
}

inline double lottery_expected_payout(const LotterySpec& spec) { return spec.expected_payout(); }

} // namespace lotecon
