// Test-only reference implementations. These deliberately use plain
// exhaustive loops and direct formula transcriptions, independent of the
// solver's cached tables, separable scans, and staged contractions.
#pragma once

#include <cmath>
#include <vector>

#include "lotecon/grids.hpp"
#include "lotecon/household.hpp"
#include "lotecon/model.hpp"

namespace oracles {

using namespace lotecon;

struct FirmPick {
    double capital = 0.0, labor = 0.0, profit_after_tax = 0.0, profit_pretax = 0.0;
};

// Exhaustive search over every feasible (k, n) grid pair, maximizing
// after-tax profit directly.
inline FirmPick brute_force_firm(double a, double theta, double eta, double psi,
                                 const Prices& prices, const ModelConfig& cfg,
                                 const StateGrid& grid) {
    const double tau = cfg.ticket_price();
    const double cap = (1.0 + cfg.credit.d) * (a - tau + psi);
    auto after_tax = [&](double k, double n, double* pretax) {
        double rt = k <= a ? prices.r : prices.r + cfg.credit.iota;
        double pt = entrepreneur_output(k, n, theta, cfg.technology) +
                    (1.0 - cfg.technology.delta) * k - (1.0 + rt) * (k - a) -
                    prices.w * std::max(n - eta, 0.0);
        double income = entrepreneur_output(k, n, theta, cfg.technology) -
                        cfg.technology.delta * k - rt * (k - a) -
                        prices.w * std::max(n - eta, 0.0) - tau + psi;
        *pretax = pt;
        return pt - income_tax(income, cfg.tax);
    };

    FirmPick best;
    best.capital = 0.0;
    best.labor = 0.0;
    {
        double pt;
        best.profit_after_tax = after_tax(0.0, 0.0, &pt);
        best.profit_pretax = pt;
    }
    for (double k : grid.k_grid) {
        if (!(k <= cap)) break;
        for (double n : grid.n_grid) {
            double pt;
            double pi = after_tax(k, n, &pt);
            if (pi > best.profit_after_tax) {
                best.profit_after_tax = pi;
                best.profit_pretax = pt;
                best.capital = k;
                best.labor = n;
            }
        }
    }
    return best;
}

struct OraclePolicies {
    // [occ][state]
    std::vector<int> savings[2];
    std::vector<int> worker_next[2];
    std::vector<double> consumption[2];
    std::vector<double> value[2];
    std::vector<FirmPick> firm;
};

// Finite-horizon backward induction from a zero terminal value, exhaustive
// over savings and next occupation. Returns the first-period greedy
// policies after `horizon` steps.
inline OraclePolicies backward_induction(const Prices& prices, const ModelConfig& cfg,
                                         const StateGrid& g, int horizon) {
    const int nt = g.n_theta, ne = g.n_eta, np = g.n_prizes, na = g.n_assets;
    const int n_states = g.n_states();
    const double beta = cfg.preferences.beta;
    const double tau = cfg.ticket_price();

    OraclePolicies out;
    out.firm.resize(n_states);
    std::vector<double> resources[2];
    resources[0].assign(n_states, 0.0);
    resources[1].assign(n_states, 0.0);
    for (int it = 0; it < nt; ++it)
        for (int ie = 0; ie < ne; ++ie)
            for (int ip = 0; ip < np; ++ip)
                for (int ia = 0; ia < na; ++ia) {
                    int s = g.state_index(it, ie, ip, ia);
                    double a = g.assets[ia], eta = g.eta_values[ie], psi = g.prizes[ip];
                    double income = eta * prices.w + prices.r * a + psi - tau;
                    resources[0][s] = eta * prices.w + (1.0 + prices.r) * a + psi - tau -
                                      income_tax(income, cfg.tax);
                    out.firm[s] = brute_force_firm(a, g.theta_values[it], eta, psi, prices, cfg, g);
                    resources[1][s] = out.firm[s].profit_after_tax + psi - tau;
                }

    std::vector<double> vw(n_states, 0.0), ve(n_states, 0.0);
    std::vector<double> vw_next(n_states), ve_next(n_states);
    for (int occ = 0; occ < 2; ++occ) {
        out.savings[occ].assign(n_states, 0);
        out.worker_next[occ].assign(n_states, 1);
        out.consumption[occ].assign(n_states, 0.0);
        out.value[occ].assign(n_states, 0.0);
    }

    for (int step = 0; step < horizon; ++step) {
        for (int it = 0; it < nt; ++it)
            for (int ie = 0; ie < ne; ++ie)
                for (int ip = 0; ip < np; ++ip)
                    for (int ia = 0; ia < na; ++ia) {
                        int s = g.state_index(it, ie, ip, ia);
                        for (int occ = 0; occ < 2; ++occ) {
                            double res = resources[occ][s];
                            bool found = false;
                            double best = 0.0, best_c = 0.0;
                            int best_j = 0, best_i = 1;
                            for (int ja = 0; ja < na; ++ja) {
                                double c = (res - g.assets[ja]) / (1.0 + cfg.tax.tau_c);
                                if (!(c > 0.0)) continue;
                                // expectation over tomorrow's shocks
                                double ew = 0.0, ee = 0.0;
                                for (int jt = 0; jt < nt; ++jt)
                                    for (int je = 0; je < ne; ++je)
                                        for (int jp = 0; jp < np; ++jp) {
                                            double p = cfg.theta_chain.P[it][jt] *
                                                       cfg.eta_chain.P[ie][je] * g.prize_probs[jp];
                                            int sn = g.state_index(jt, je, jp, ja);
                                            ew += p * vw[sn];
                                            ee += p * ve[sn];
                                        }
                                for (int i = 1; i >= 0; --i) {  // worker branch first
                                    double val = utility(c, cfg.preferences) +
                                                 beta * (i == 1 ? ew : ee);
                                    if (!found || val > best) {
                                        found = true;
                                        best = val;
                                        best_c = c;
                                        best_j = ja;
                                        best_i = i;
                                    }
                                }
                            }
                            if (!found) {
                                // floor: zero savings, best continuation
                                best_c = cfg.numerics.consumption_floor;
                                best_j = 0;
                                double ew = 0.0, ee = 0.0;
                                for (int jt = 0; jt < nt; ++jt)
                                    for (int je = 0; je < ne; ++je)
                                        for (int jp = 0; jp < np; ++jp) {
                                            double p = cfg.theta_chain.P[it][jt] *
                                                       cfg.eta_chain.P[ie][je] * g.prize_probs[jp];
                                            int sn = g.state_index(jt, je, jp, 0);
                                            ew += p * vw[sn];
                                            ee += p * ve[sn];
                                        }
                                best_i = ew >= ee ? 1 : 0;
                                best = utility(best_c, cfg.preferences) +
                                       beta * (best_i == 1 ? ew : ee);
                            }
                            (occ == 0 ? vw_next : ve_next)[s] = best;
                            out.savings[occ][s] = best_j;
                            out.worker_next[occ][s] = best_i;
                            out.consumption[occ][s] = best_c;
                            out.value[occ][s] = best;
                        }
                    }
        vw.swap(vw_next);
        ve.swap(ve_next);
    }
    return out;
}

// Dense transition-matrix pushforward for small grids: row s' of the
// matrix collects mass from every source cell whose policy lands there.
inline std::vector<double> dense_pushforward(const std::vector<double>& phi_flat,
                                             const PolicySet& pol, const ModelConfig& cfg,
                                             const StateGrid& g) {
    const int n_states = g.n_states();
    std::vector<double> out(2 * n_states, 0.0);
    for (int occ = 0; occ < 2; ++occ)
        for (int it = 0; it < g.n_theta; ++it)
            for (int ie = 0; ie < g.n_eta; ++ie)
                for (int ip = 0; ip < g.n_prizes; ++ip)
                    for (int ia = 0; ia < g.n_assets; ++ia) {
                        int s = g.state_index(it, ie, ip, ia);
                        double m = phi_flat[occ * n_states + s];
                        if (m == 0.0) continue;
                        int ja = static_cast<int>(pol.savings_index[occ][s]);
                        int occ_next = pol.next_worker[occ][s] ? Worker : Entrepreneur;
                        for (int jt = 0; jt < g.n_theta; ++jt)
                            for (int je = 0; je < g.n_eta; ++je)
                                for (int jp = 0; jp < g.n_prizes; ++jp) {
                                    double p = cfg.theta_chain.P[it][jt] * cfg.eta_chain.P[ie][je] *
                                               g.prize_probs[jp];
                                    out[occ_next * n_states + g.state_index(jt, je, jp, ja)] +=
                                        m * p;
                                }
                    }
    return out;
}

} // namespace oracles
