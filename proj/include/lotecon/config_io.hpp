#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "lotecon/ini.hpp"
#include "lotecon/params.hpp"

namespace lotecon {

namespace detail {

inline MarkovChain load_chain(const IniDoc& doc, const std::string& section) {
    MarkovChain chain;
    chain.grid = doc.get_vector(section, "grid");
    for (std::size_t i = 0; i < chain.grid.size(); ++i)
        chain.P.push_back(doc.get_vector(section, "row" + std::to_string(i)));
    chain.normalize_rows();
    chain.validate();
    return chain;
}

} // namespace detail

// Reads a ModelConfig from INI text. Lottery prizes may be given either as
// absolute magnitudes (`prizes`) or as `prize_unit` with `relative_prizes`.
// The non-winning probability is recomputed from the winning mass; a stated
// value further than 1e-6 from that is rejected rather than absorbed.
inline ModelConfig load_config_text(const std::string& text, const std::string& origin = "<string>") {
    IniDoc doc = IniDoc::parse(text, origin);
    ModelConfig c;
    c.preferences.sigma = doc.get_double("preferences", "sigma");
    c.preferences.beta = doc.get_double("preferences", "beta");
    c.technology.alpha = doc.get_double("technology", "alpha");
    c.technology.v = doc.get_double("technology", "v");
    c.technology.delta = doc.get_double("technology", "delta");
    c.technology.A = doc.get_double("technology", "A", 1.0);
    c.tax.tau_c = doc.get_double("tax", "tau_c");
    c.tax.tau_I = doc.get_double("tax", "tau_I");
    c.tax.a0 = doc.get_double("tax", "a0");
    c.tax.a1 = doc.get_double("tax", "a1");
    c.tax.a2 = doc.get_double("tax", "a2");
    c.credit.iota = doc.get_double("credit", "iota");
    c.credit.d = doc.get_double("credit", "d");

    if (doc.has("lottery", "tau")) {
        double tau = doc.get_double("lottery", "tau");
        std::vector<double> probs = doc.get_vector("lottery", "probs");
        LotterySpec spec;
        if (doc.has("lottery", "prize_unit")) {
            spec = LotterySpec::from_relative(tau, doc.get_double("lottery", "prize_unit"),
                                              doc.get_vector("lottery", "relative_prizes"), probs);
        } else {
            spec.tau = tau;
            spec.prizes = doc.get_vector("lottery", "prizes");
            spec.probs = probs;
            if (spec.probs.empty()) throw ValidationError("lottery.probs is empty");
            double winning = 0.0;
            for (std::size_t j = 1; j < spec.probs.size(); ++j) winning += spec.probs[j];
            double p0 = 1.0 - winning;
            if (std::fabs(spec.probs[0] - p0) > 1e-6)
                throw ValidationError("lottery.probs[0] = " + std::to_string(spec.probs[0]) +
                                      " is inconsistent with 1 - winning mass = " + std::to_string(p0));
            spec.probs[0] = p0;
        }
        if (doc.has("lottery", "revenue_share_target"))
            spec.revenue_share_target = doc.get_double("lottery", "revenue_share_target");
        spec.validate();
        // Prize structure must clear against the ticket price (Table-2 precision).
        double payout = spec.expected_payout();
        if (std::fabs(payout - spec.tau) > 5e-4)
            throw ValidationError("lottery: expected payout " + std::to_string(payout) +
                                  " does not balance ticket price " + std::to_string(spec.tau));
        c.lottery = spec;
    }

    c.eta_chain = detail::load_chain(doc, "eta_chain");
    c.theta_chain = detail::load_chain(doc, "theta_chain");

    c.assets.min = doc.get_double("assets", "min");
    c.assets.max = doc.get_double("assets", "max");
    c.assets.count = doc.get_int("assets", "count");
    std::string spacing = doc.get_string("assets", "spacing", "linear");
    if (spacing == "linear") c.assets.spacing = GridSpacing::Linear;
    else if (spacing == "log") c.assets.spacing = GridSpacing::Log;
    else throw ValidationError("assets.spacing must be 'linear' or 'log', got '" + spacing + "'");

    c.firm.k_count = doc.get_int("firm", "k_count", 1000);
    c.firm.n_count = doc.get_int("firm", "n_count", 1000);
    c.firm.n_max = doc.get_double("firm", "n_max", 40.0);

    Numerics& n = c.numerics;
    n.vfi_tol = doc.get_double("numerics", "vfi_tol", n.vfi_tol);
    n.vfi_max_iter = doc.get_int("numerics", "vfi_max_iter", n.vfi_max_iter);
    n.howard_steps = doc.get_int("numerics", "howard_steps", n.howard_steps);
    n.dist_tol = doc.get_double("numerics", "dist_tol", n.dist_tol);
    n.dist_max_iter = doc.get_int("numerics", "dist_max_iter", n.dist_max_iter);
    n.kl_tol = doc.get_double("numerics", "kl_tol", n.kl_tol);
    n.kl_max_iter = doc.get_int("numerics", "kl_max_iter", n.kl_max_iter);
    n.bracket_lo = doc.get_double("numerics", "bracket_lo", n.bracket_lo);
    n.bracket_hi = doc.get_double("numerics", "bracket_hi", n.bracket_hi);
    n.tau_tol = doc.get_double("numerics", "tau_tol", n.tau_tol);
    n.tau_max_iter = doc.get_int("numerics", "tau_max_iter", n.tau_max_iter);
    n.tau_damping = doc.get_double("numerics", "tau_damping", n.tau_damping);
    n.consumption_floor = doc.get_double("numerics", "consumption_floor", n.consumption_floor);

    c.validate();
    return c;
}

inline ModelConfig load_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ValidationError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return load_config_text(ss.str(), path);
}

} // namespace lotecon
