#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include "lotecon/distribution.hpp"
#include "lotecon/equilibrium.hpp"

namespace lotecon {

namespace detail {
struct FileHandle {
    std::FILE* f;
    std::string path;
    explicit FileHandle(const std::string& p) : f(std::fopen(p.c_str(), "wb")), path(p) {
        if (!f) throw ValidationError("report: cannot open for writing: " + p);
    }
    ~FileHandle() {
        if (f) std::fclose(f);
    }
    void close() {
        if (f && std::fclose(f) != 0) throw ValidationError("report: close failed: " + path);
        f = nullptr;
    }
};
} // namespace detail

inline void write_moments_csv(const MomentsReport& m, const std::string& path) {
    detail::FileHandle h(path);
    std::fputs("moment,value\n", h.f);
    auto row = [&](const char* name, double v) { std::fprintf(h.f, "%s,%.17g\n", name, v); };
    row("aggregate output", m.aggregate_output);
    row("aggregate capital (assets)", m.aggregate_capital);
    row("aggregate capital (productive)", m.aggregate_capital_productive);
    row("aggregate consumption", m.aggregate_consumption);
    row("capital-output ratio", m.capital_output_ratio);
    row("government expenditure/GDP", m.govt_expenditure_share);
    row("income tax/total tax revenue", m.income_tax_share);
    row("fraction of entrepreneurs", m.entrepreneur_fraction);
    row("share of entrepreneur's income", m.entrepreneur_income_share);
    row("share of entrepreneur's asset", m.entrepreneur_asset_share);
    row("share of entrepreneur's investment", m.entrepreneur_investment_share);
    row("exit rate", m.exit_rate);
    row("lottery ticket price", m.tau);
    row("lottery revenue/output", m.tau_output_share);
    row("mass at top asset point", m.top_asset_mass);
    h.close();
}

inline void write_theta_table_csv(const MomentsReport& m, const std::string& path) {
    detail::FileHandle h(path);
    std::fputs("theta,population_share,entrepreneur_share,mean_investment,mean_assets,mean_leverage\n",
               h.f);
    for (const auto& r : m.theta_table)
        std::fprintf(h.f, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.theta, r.population_share,
                     r.entrepreneur_share, r.mean_investment, r.mean_assets, r.mean_leverage);
    h.close();
}

inline void write_prize_leverage_csv(const MomentsReport& m, const std::string& path) {
    detail::FileHandle h(path);
    std::fputs("prize,mean_leverage,entrepreneur_mass\n", h.f);
    for (const auto& r : m.leverage_by_prize)
        std::fprintf(h.f, "%.17g,%.17g,%.17g\n", r.prize, r.mean_leverage, r.entrepreneur_mass);
    h.close();
}

// Aligned human-readable moment summary.
inline std::string moments_text(const MomentsReport& m, const std::string& title) {
    char buf[160];
    std::string out = title + "\n" + std::string(title.size(), '-') + "\n";
    auto lvl = [&](const char* name, double v) {
        std::snprintf(buf, sizeof(buf), "%-36s %10.4f\n", name, v);
        out += buf;
    };
    auto pct = [&](const char* name, double v) {
        std::snprintf(buf, sizeof(buf), "%-36s %9.2f%%\n", name, v * 100.0);
        out += buf;
    };
    lvl("aggregate output", m.aggregate_output);
    lvl("aggregate capital (assets)", m.aggregate_capital);
    lvl("aggregate capital (productive)", m.aggregate_capital_productive);
    lvl("aggregate consumption", m.aggregate_consumption);
    lvl("capital-output ratio", m.capital_output_ratio);
    pct("government expenditure/GDP", m.govt_expenditure_share);
    pct("income tax/total tax revenue", m.income_tax_share);
    pct("fraction of entrepreneurs", m.entrepreneur_fraction);
    pct("share of entrepreneur's income", m.entrepreneur_income_share);
    pct("share of entrepreneur's asset", m.entrepreneur_asset_share);
    pct("share of entrepreneur's investment", m.entrepreneur_investment_share);
    pct("exit rate", m.exit_rate);
    if (m.tau > 0.0) {
        lvl("lottery ticket price", m.tau);
        pct("lottery revenue/output", m.tau_output_share);
    }
    out += "\nentrepreneurial activity by ability\n";
    std::snprintf(buf, sizeof(buf), "%8s %10s %10s %12s %12s %12s\n", "theta", "% in pop",
                  "% entrep", "avg invest", "avg assets", "avg lever");
    out += buf;
    for (const auto& r : m.theta_table) {
        if (r.population_share > 0.0)
            std::snprintf(buf, sizeof(buf), "%8.3f %9.2f%% %9.2f%% %12.2f %12.2f %11.2f%%\n",
                          r.theta, r.population_share * 100.0, r.entrepreneur_share * 100.0,
                          r.mean_investment, r.mean_assets, r.mean_leverage * 100.0);
        else
            std::snprintf(buf, sizeof(buf), "%8.3f %9.2f%% %9.2f%% %12s %12s %12s\n", r.theta,
                          0.0, 0.0, "-", "-", "-");
        out += buf;
    }
    if (m.leverage_by_prize.size() > 1) {
        out += "\naverage leverage by prize\n";
        for (const auto& r : m.leverage_by_prize) {
            std::snprintf(buf, sizeof(buf), "  prize %8.3f: %7.2f%%\n", r.prize,
                          r.mean_leverage * 100.0);
            out += buf;
        }
    }
    return out;
}

inline void write_delta_csv(const DeltaReport& rep, const std::string& path) {
    detail::FileHandle h(path);
    std::fputs("moment,base,other,pct_change\n", h.f);
    for (const auto& r : rep.rows)
        std::fprintf(h.f, "%s,%.17g,%.17g,%.17g\n", r.name.c_str(), r.base, r.other, r.pct_change);
    h.close();
}

inline std::string delta_text(const DeltaReport& rep, const std::string& base_label,
                              const std::string& other_label) {
    char buf[160];
    std::string out;
    std::snprintf(buf, sizeof(buf), "%-36s %12s %12s %10s\n", "moment", base_label.c_str(),
                  other_label.c_str(), "% change");
    out += buf;
    for (const auto& r : rep.rows) {
        std::snprintf(buf, sizeof(buf), "%-36s %12.4f %12.4f %+9.2f%%\n", r.name.c_str(), r.base,
                      r.other, r.pct_change);
        out += buf;
    }
    return out;
}

// Plot-data exports, one tidy CSV per figure.

// Ability composition: population, worker, and entrepreneur mass per theta.
inline void write_ability_composition_csv(const Equilibrium& eq, const std::string& path) {
    const StateGrid& g = eq.grid;
    std::vector<double> pop(g.n_theta, 0.0), ent(g.n_theta, 0.0);
    for (int it = 0; it < g.n_theta; ++it)
        for (int ie = 0; ie < g.n_eta; ++ie)
            for (int ip = 0; ip < g.n_prizes; ++ip)
                for (int ia = 0; ia < g.n_assets; ++ia) {
                    int s = g.state_index(it, ie, ip, ia);
                    pop[it] += eq.phi.at(Worker, s) + eq.phi.at(Entrepreneur, s);
                    ent[it] += eq.phi.at(Entrepreneur, s);
                }
    detail::FileHandle h(path);
    std::fputs("theta,population_mass,worker_mass,entrepreneur_mass,entrepreneur_share\n", h.f);
    for (int it = 0; it < g.n_theta; ++it)
        std::fprintf(h.f, "%.17g,%.17g,%.17g,%.17g,%.17g\n", g.theta_values[it], pop[it],
                     pop[it] - ent[it], ent[it], pop[it] > 0.0 ? ent[it] / pop[it] : 0.0);
    h.close();
}

// Investment policy by asset and ability at the median eta, zero prize.
inline void write_investment_by_asset_csv(const Equilibrium& eq, const std::string& path) {
    const StateGrid& g = eq.grid;
    int ie = g.n_eta / 2;
    detail::FileHandle h(path);
    std::fputs("theta,asset,capital,labor\n", h.f);
    for (int it = 0; it < g.n_theta; ++it)
        for (int ia = 0; ia < g.n_assets; ++ia) {
            int s = g.state_index(it, ie, 0, ia);
            std::fprintf(h.f, "%.17g,%.17g,%.17g,%.17g\n", g.theta_values[it], g.assets[ia],
                         eq.policies.firm_capital[s], eq.policies.firm_labor[s]);
        }
    h.close();
}

// Asset density and CDF by occupation.
inline void write_asset_density_csv(const Equilibrium& eq, const std::string& path) {
    const StateGrid& g = eq.grid;
    auto dw = asset_marginal(eq.phi, g, Worker);
    auto de = asset_marginal(eq.phi, g, Entrepreneur);
    double mw = occupation_mass(eq.phi, g, Worker), me = occupation_mass(eq.phi, g, Entrepreneur);
    detail::FileHandle h(path);
    std::fputs("asset,worker_density,entrepreneur_density,worker_cdf,entrepreneur_cdf\n", h.f);
    double cw = 0.0, ce = 0.0;
    for (int ia = 0; ia < g.n_assets; ++ia) {
        double w = mw > 0.0 ? dw[ia] / mw : 0.0;
        double e = me > 0.0 ? de[ia] / me : 0.0;
        cw += w;
        ce += e;
        std::fprintf(h.f, "%.17g,%.17g,%.17g,%.17g,%.17g\n", g.assets[ia], w, e, cw, ce);
    }
    h.close();
}

// Worker savings and consumption policy by winning status. Winner columns
// average over positive prizes with renormalized prize probabilities;
// exogenous states average under the stationary marginals.
inline void write_policy_by_winning_csv(const Equilibrium& eq, const std::string& path) {
    const StateGrid& g = eq.grid;
    auto pi_t = stationary_distribution(eq.config.theta_chain);
    auto pi_e = stationary_distribution(eq.config.eta_chain);
    double win_mass = 0.0;
    for (int ip = 1; ip < g.n_prizes; ++ip) win_mass += g.prize_probs[ip];
    detail::FileHandle h(path);
    std::fputs("asset,c_nonwinner,c_winner,savings_nonwinner,savings_winner\n", h.f);
    for (int ia = 0; ia < g.n_assets; ++ia) {
        double c0 = 0.0, c1 = 0.0, s0 = 0.0, s1 = 0.0;
        for (int it = 0; it < g.n_theta; ++it)
            for (int ie = 0; ie < g.n_eta; ++ie) {
                double wgt = pi_t[it] * pi_e[ie];
                int s = g.state_index(it, ie, 0, ia);
                c0 += wgt * eq.policies.consumption[Worker][s];
                s0 += wgt * g.assets[eq.policies.savings_index[Worker][s]];
                if (win_mass > 0.0)
                    for (int ip = 1; ip < g.n_prizes; ++ip) {
                        int sw = g.state_index(it, ie, ip, ia);
                        double pw = g.prize_probs[ip] / win_mass;
                        c1 += wgt * pw * eq.policies.consumption[Worker][sw];
                        s1 += wgt * pw * g.assets[eq.policies.savings_index[Worker][sw]];
                    }
            }
        std::fprintf(h.f, "%.17g,%.17g,%.17g,%.17g,%.17g\n", g.assets[ia], c0, c1, s0, s1);
    }
    h.close();
}

// Entrepreneur investment policy by prize, per ability, eta averaged
// under its stationary marginal.
inline void write_investment_by_prize_csv(const Equilibrium& eq, const std::string& path) {
    const StateGrid& g = eq.grid;
    auto pi_e = stationary_distribution(eq.config.eta_chain);
    detail::FileHandle h(path);
    std::fputs("theta,prize,asset,capital\n", h.f);
    for (int it = 0; it < g.n_theta; ++it)
        for (int ip = 0; ip < g.n_prizes; ++ip)
            for (int ia = 0; ia < g.n_assets; ++ia) {
                double k = 0.0;
                for (int ie = 0; ie < g.n_eta; ++ie)
                    k += pi_e[ie] * eq.policies.firm_capital[g.state_index(it, ie, ip, ia)];
                std::fprintf(h.f, "%.17g,%.17g,%.17g,%.17g\n", g.theta_values[it], g.prizes[ip],
                             g.assets[ia], k);
            }
    h.close();
}

inline void write_text_file(const std::string& text, const std::string& path) {
    detail::FileHandle h(path);
    std::fputs(text.c_str(), h.f);
    h.close();
}

} // namespace lotecon
