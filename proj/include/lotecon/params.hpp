#pragma once

#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "lotecon/errors.hpp"

namespace lotecon {

struct Preferences {
    double sigma = 2.0;    // relative risk aversion
    double beta = 0.9575;  // discount factor per period

    void validate() const {
        if (!(sigma > 0.0)) throw ValidationError("preferences.sigma must be > 0");
        if (!(beta > 0.0 && beta < 1.0)) throw ValidationError("preferences.beta must be in (0,1)");
    }
};

struct Technology {
    double alpha = 0.36;  // capital share
    double v = 0.88;      // entrepreneurial span of control
    double delta = 0.06;  // depreciation rate per period
    double A = 1.0;       // corporate TFP level

    void validate() const {
        if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("technology.alpha must be in (0,1)");
        if (!(v > 0.0 && v < 1.0)) throw ValidationError("technology.v must be in (0,1)");
        if (!(delta >= 0.0 && delta <= 1.0)) throw ValidationError("technology.delta must be in [0,1]");
        if (!(A > 0.0)) throw ValidationError("technology.A must be > 0");
    }
};

struct TaxSystem {
    double tau_c = 0.0567;  // consumption tax rate
    double tau_I = 0.0316;  // proportional income tax rate
    double a0 = 0.258;      // nonlinear schedule level
    double a1 = 0.768;      // nonlinear schedule curvature
    double a2 = 0.438;      // nonlinear schedule scale

    void validate() const {
        if (!(tau_c >= 0.0)) throw ValidationError("tax.tau_c must be >= 0");
        if (!(tau_I >= 0.0)) throw ValidationError("tax.tau_I must be >= 0");
        if (!(a0 > 0.0 && a1 > 0.0 && a2 > 0.0))
            throw ValidationError("tax.a0, tax.a1, tax.a2 must be > 0");
    }
};

struct CreditSector {
    double iota = 0.05;  // loan rate spread over r
    double d = 0.5;      // maximum leverage parameter

    void validate() const {
        if (!(iota >= 0.0)) throw ValidationError("credit.iota must be >= 0");
        if (!(d >= 0.0)) throw ValidationError("credit.d must be >= 0");
    }
};

// Per-period lottery: every agent pays `tau` for one ticket and draws a
// prize from `prizes` with probabilities `probs`. prizes[0] is the
// non-winning outcome and must be zero.
struct LotterySpec {
    double tau = 0.0;             // ticket price, consumption units
    std::vector<double> prizes;   // absolute prize magnitudes, prizes[0] = 0
    std::vector<double> probs;    // winning probabilities, same length
    std::optional<double> revenue_share_target;  // if set, tau is re-targeted to this share of output

    // Builds absolute prizes from relative magnitudes and a single prize
    // unit. The non-winning probability is recomputed as one minus the
    // winning mass so the vector sums to 1 exactly.
    static LotterySpec from_relative(double ticket_price, double prize_unit,
                                     const std::vector<double>& relative,
                                     const std::vector<double>& winning_probs) {
        if (relative.size() != winning_probs.size())
            throw ValidationError("lottery: relative prizes and probabilities differ in length");
        if (relative.empty() || relative[0] != 0.0)
            throw ValidationError("lottery: first relative prize must be 0");
        LotterySpec s;
        s.tau = ticket_price;
        s.prizes.resize(relative.size());
        s.probs = winning_probs;
        double winning_mass = 0.0;
        for (std::size_t j = 1; j < winning_probs.size(); ++j) winning_mass += winning_probs[j];
        s.probs[0] = 1.0 - winning_mass;
        for (std::size_t j = 0; j < relative.size(); ++j) s.prizes[j] = relative[j] * prize_unit;
        s.validate();
        return s;
    }

    double expected_payout() const {
        double e = 0.0;
        for (std::size_t j = 0; j < prizes.size(); ++j) e += probs[j] * prizes[j];
        return e;
    }

    // Scales all prizes so the expected payout equals the ticket price.
    void rebalance_to(double ticket_price) {
        double per_unit = 0.0;
        for (std::size_t j = 0; j < prizes.size(); ++j) per_unit += probs[j] * prizes[j];
        if (per_unit <= 0.0) throw ValidationError("lottery: cannot rebalance a zero-prize structure");
        double scale = ticket_price / per_unit;
        for (double& z : prizes) z *= scale;
        tau = ticket_price;
    }

    void validate() const {
        if (prizes.size() != probs.size() || prizes.empty())
            throw ValidationError("lottery: prizes and probs must be nonempty and equal length");
        if (prizes[0] != 0.0) throw ValidationError("lottery: prizes[0] must be 0");
        double sum = 0.0;
        for (std::size_t j = 0; j < probs.size(); ++j) {
            if (probs[j] < 0.0) throw ValidationError("lottery: probabilities must be >= 0");
            if (j > 0 && prizes[j] < prizes[j - 1])
                throw ValidationError("lottery: prizes must be nondecreasing");
            sum += probs[j];
        }
        if (std::fabs(sum - 1.0) > 1e-12)
            throw ValidationError("lottery: probabilities sum to " + std::to_string(sum) + ", not 1");
        if (revenue_share_target && !(*revenue_share_target >= 0.0 && *revenue_share_target < 1.0))
            throw ValidationError("lottery: revenue_share_target must be in [0,1)");
    }
};

struct MarkovChain {
    std::vector<double> grid;             // state values, increasing (a leading zero is allowed)
    std::vector<std::vector<double>> P;   // row-stochastic transition matrix

    int size() const { return static_cast<int>(grid.size()); }

    // Rows within `slack` of summing to one are rescaled proportionally;
    // anything further off is rejected.
    void normalize_rows(double slack = 2e-3) {
        for (std::size_t i = 0; i < P.size(); ++i) {
            double sum = 0.0;
            for (double p : P[i]) sum += p;
            if (std::fabs(sum - 1.0) > slack)
                throw ValidationError("markov chain: row " + std::to_string(i) +
                                      " sums to " + std::to_string(sum));
            for (double& p : P[i]) p /= sum;
        }
    }

    void validate() const {
        if (grid.empty() || P.size() != grid.size())
            throw ValidationError("markov chain: grid/matrix size mismatch");
        for (std::size_t i = 0; i < grid.size(); ++i) {
            if (P[i].size() != grid.size())
                throw ValidationError("markov chain: matrix is not square");
            double sum = 0.0;
            for (double p : P[i]) {
                if (p < 0.0) throw ValidationError("markov chain: negative transition probability");
                sum += p;
            }
            if (std::fabs(sum - 1.0) > 1e-12)
                throw ValidationError("markov chain: row " + std::to_string(i) +
                                      " sums to " + std::to_string(sum));
            // strictly increasing grid, except a possible leading zero
            if (i > 0 && !(grid[i] > grid[i - 1]))
                throw ValidationError("markov chain: grid values must be strictly increasing");
        }
    }
};

enum class GridSpacing { Linear, Log };

struct AssetGridSpec {
    double min = 0.01;
    double max = 20.0;
    int count = 1000;
    GridSpacing spacing = GridSpacing::Linear;

    void validate() const {
        if (!(min >= 0.0)) throw ValidationError("assets.min must be >= 0");
        if (!(max > min)) throw ValidationError("assets.max must exceed assets.min");
        if (count < 2) throw ValidationError("assets.count must be >= 2");
        if (spacing == GridSpacing::Log && !(min > 0.0))
            throw ValidationError("assets.min must be > 0 for log spacing");
    }
};

// Entrepreneurs pick capital and labor off dedicated grids; k spans
// [0, (1+d) * assets.max], n spans [0, n_max].
struct FirmGridSpec {
    int k_count = 1000;
    int n_count = 1000;
    double n_max = 40.0;

    void validate() const {
        if (k_count < 2 || n_count < 2) throw ValidationError("firm grid counts must be >= 2");
        if (!(n_max > 0.0)) throw ValidationError("firm.n_max must be > 0");
    }
};

struct Numerics {
    double vfi_tol = 1e-7;          // sup-norm tolerance on value tables
    int vfi_max_iter = 3000;
    int howard_steps = 30;          // policy-evaluation sweeps between maximizations (0 disables)
    double dist_tol = 1e-9;         // L1 tolerance on the invariant distribution
    int dist_max_iter = 50000;
    double kl_tol = 1e-4;           // relative gap |implied - guess| on the capital-labor ratio
    int kl_max_iter = 60;
    double bracket_lo = 0.5;        // bisection bracket, as multiples of the frictionless ratio
    double bracket_hi = 2.0;
    double tau_tol = 1e-3;          // relative gap on the lottery revenue target
    int tau_max_iter = 50;
    double tau_damping = 0.5;
    double consumption_floor = 1e-6;

    void validate() const {
        if (!(vfi_tol > 0.0 && dist_tol > 0.0 && kl_tol > 0.0 && tau_tol > 0.0))
            throw ValidationError("numerics tolerances must be > 0");
        if (vfi_max_iter < 1 || dist_max_iter < 1 || kl_max_iter < 1 || tau_max_iter < 1)
            throw ValidationError("numerics iteration caps must be >= 1");
        if (howard_steps < 0) throw ValidationError("numerics.howard_steps must be >= 0");
        if (!(bracket_lo > 0.0 && bracket_hi > bracket_lo))
            throw ValidationError("numerics bisection bracket is empty");
        if (!(tau_damping > 0.0 && tau_damping <= 1.0))
            throw ValidationError("numerics.tau_damping must be in (0,1]");
        if (!(consumption_floor > 0.0)) throw ValidationError("numerics.consumption_floor must be > 0");
    }
};

struct ModelConfig {
    Preferences preferences;
    Technology technology;
    TaxSystem tax;
    CreditSector credit;
    std::optional<LotterySpec> lottery;  // absent in the benchmark economy
    MarkovChain eta_chain;
    MarkovChain theta_chain;
    AssetGridSpec assets;
    FirmGridSpec firm;
    Numerics numerics;

    bool has_lottery() const { return lottery.has_value(); }
    double ticket_price() const { return lottery ? lottery->tau : 0.0; }

    void validate() const {
        preferences.validate();
        technology.validate();
        tax.validate();
        credit.validate();
        if (lottery) lottery->validate();
        eta_chain.validate();
        theta_chain.validate();
        assets.validate();
        firm.validate();
        numerics.validate();
    }

    std::string canonical_text() const;
};

// Appendix-calibrated defaults: the benchmark economy.
inline ModelConfig default_benchmark_config() {
    ModelConfig c;
    c.eta_chain.grid = {0.646, 0.798, 0.966, 1.169, 1.444};
    c.eta_chain.P = {{0.731, 0.253, 0.016, 0.000, 0.000},
                     {0.192, 0.555, 0.236, 0.017, 0.000},
                     {0.011, 0.222, 0.533, 0.222, 0.011},
                     {0.000, 0.017, 0.236, 0.555, 0.192},
                     {0.000, 0.000, 0.016, 0.253, 0.731}};
    c.eta_chain.normalize_rows();
    c.theta_chain.grid = {0.000, 0.706, 1.470, 2.234};
    c.theta_chain.P = {{0.780, 0.220, 0.000, 0.000},
                       {0.430, 0.420, 0.150, 0.000},
                       {0.000, 0.430, 0.420, 0.150},
                       {0.000, 0.000, 0.220, 0.780}};
    c.theta_chain.normalize_rows();
    return c;
}

// Benchmark plus the calibrated national lottery.
inline ModelConfig default_lottery_config() {
    ModelConfig c = default_benchmark_config();
    c.lottery = LotterySpec::from_relative(0.0292, 5.08, {0.0, 1.0, 3.0, 6.0},
                                           {0.9950, 0.0047, 0.00025, 0.00005});
    c.lottery->revenue_share_target = 0.0132;
    return c;
}

namespace detail {
inline void append_kv(std::string& out, const char* key, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s = %.17g\n", key, v);
    out += buf;
}
inline void append_kv(std::string& out, const char* key, int v) {
    out += key;
    out += " = " + std::to_string(v) + "\n";
}
inline void append_vec(std::string& out, const std::string& key, const std::vector<double>& v) {
    out += key + " =";
    char buf[32];
    for (double x : v) {
        std::snprintf(buf, sizeof(buf), " %.17g", x);
        out += buf;
    }
    out += "\n";
}
} // namespace detail

// Deterministic full-precision dump; the config content hash is taken over
// this text so file- and code-built configs hash identically.
inline std::string ModelConfig::canonical_text() const {
    std::string s;
    s += "[preferences]\n";
    detail::append_kv(s, "sigma", preferences.sigma);
    detail::append_kv(s, "beta", preferences.beta);
    s += "[technology]\n";
    detail::append_kv(s, "alpha", technology.alpha);
    detail::append_kv(s, "v", technology.v);
    detail::append_kv(s, "delta", technology.delta);
    detail::append_kv(s, "A", technology.A);
    s += "[tax]\n";
    detail::append_kv(s, "tau_c", tax.tau_c);
    detail::append_kv(s, "tau_I", tax.tau_I);
    detail::append_kv(s, "a0", tax.a0);
    detail::append_kv(s, "a1", tax.a1);
    detail::append_kv(s, "a2", tax.a2);
    s += "[credit]\n";
    detail::append_kv(s, "iota", credit.iota);
    detail::append_kv(s, "d", credit.d);
    if (lottery) {
        s += "[lottery]\n";
        detail::append_kv(s, "tau", lottery->tau);
        detail::append_vec(s, "prizes", lottery->prizes);
        detail::append_vec(s, "probs", lottery->probs);
        if (lottery->revenue_share_target)
            detail::append_kv(s, "revenue_share_target", *lottery->revenue_share_target);
    }
    s += "[eta_chain]\n";
    detail::append_vec(s, "grid", eta_chain.grid);
    for (std::size_t i = 0; i < eta_chain.P.size(); ++i)
        detail::append_vec(s, "row" + std::to_string(i), eta_chain.P[i]);
    s += "[theta_chain]\n";
    detail::append_vec(s, "grid", theta_chain.grid);
    for (std::size_t i = 0; i < theta_chain.P.size(); ++i)
        detail::append_vec(s, "row" + std::to_string(i), theta_chain.P[i]);
    s += "[assets]\n";
    detail::append_kv(s, "min", assets.min);
    detail::append_kv(s, "max", assets.max);
    detail::append_kv(s, "count", assets.count);
    s += std::string("spacing = ") + (assets.spacing == GridSpacing::Log ? "log" : "linear") + "\n";
    s += "[firm]\n";
    detail::append_kv(s, "k_count", firm.k_count);
    detail::append_kv(s, "n_count", firm.n_count);
    detail::append_kv(s, "n_max", firm.n_max);
    s += "[numerics]\n";
    detail::append_kv(s, "vfi_tol", numerics.vfi_tol);
    detail::append_kv(s, "vfi_max_iter", numerics.vfi_max_iter);
    detail::append_kv(s, "howard_steps", numerics.howard_steps);
    detail::append_kv(s, "dist_tol", numerics.dist_tol);
    detail::append_kv(s, "dist_max_iter", numerics.dist_max_iter);
    detail::append_kv(s, "kl_tol", numerics.kl_tol);
    detail::append_kv(s, "kl_max_iter", numerics.kl_max_iter);
    detail::append_kv(s, "bracket_lo", numerics.bracket_lo);
    detail::append_kv(s, "bracket_hi", numerics.bracket_hi);
    detail::append_kv(s, "tau_tol", numerics.tau_tol);
    detail::append_kv(s, "tau_max_iter", numerics.tau_max_iter);
    detail::append_kv(s, "tau_damping", numerics.tau_damping);
    detail::append_kv(s, "consumption_floor", numerics.consumption_floor);
    return s;
}

} // namespace lotecon
