#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "lotecon/grids.hpp"
#include "lotecon/model.hpp"
#include "lotecon/parallel.hpp"
#include "lotecon/params.hpp"

namespace lotecon {

struct ValueTables {
    std::vector<double> worker;  // V^W per (theta, eta, prize, asset)
    std::vector<double> entre;   // V^E, same layout

    void resize(int n) {
        worker.assign(n, 0.0);
        entre.assign(n, 0.0);
    }
};

// Decision rules per state. Occupation-dependent rules are indexed
// [occupation][state]; the static firm problem does not depend on today's
// occupation and is stored once per state.
struct PolicySet {
    std::array<std::vector<std::uint32_t>, 2> savings_index;  // a'(s) as asset grid index
    std::array<std::vector<double>, 2> consumption;           // c(s) > 0
    std::array<std::vector<std::uint8_t>, 2> next_worker;     // 1 = worker next period
    std::array<std::vector<std::uint8_t>, 2> floored;         // consumption floor applied

    std::vector<double> firm_capital;      // k(s)
    std::vector<double> firm_labor;        // n(s)
    std::vector<double> profit_after_tax;  // pi^E entering the budget
    std::vector<double> profit_pretax;     // gross resources before income tax

    void resize(int n) {
        for (int occ = 0; occ < 2; ++occ) {
            savings_index[occ].assign(n, 0);
            consumption[occ].assign(n, 0.0);
            next_worker[occ].assign(n, 1);
            floored[occ].assign(n, 0);
        }
        firm_capital.assign(n, 0.0);
        firm_labor.assign(n, 0.0);
        profit_after_tax.assign(n, 0.0);
        profit_pretax.assign(n, 0.0);
    }

    long floored_count() const {
        long c = 0;
        for (int occ = 0; occ < 2; ++occ)
            for (auto f : floored[occ]) c += f;
        return c;
    }
};

struct FirmChoice {
    double capital = 0.0;
    double labor = 0.0;
    double profit_after_tax = 0.0;
    double profit_pretax = 0.0;
};

struct HouseholdDiagnostics {
    std::vector<double> residuals;  // sup-norm change per maximization sweep
    int iterations = 0;
    long floored_states = 0;
};

struct HouseholdSolution {
    ValueTables values;
    PolicySet policies;
    HouseholdDiagnostics diagnostics;
};

namespace detail {

// Best labor on the n grid for output coefficient coef = theta * k^(alpha v):
// maximizes coef * n^((1-alpha)v) - w * max(n - eta, 0). First maximum wins.
inline int best_labor_index(double coef, const std::vector<double>& npow,
                            const std::vector<double>& hire_cost, double* best_value) {
    int besti = 0;
    double best = coef * npow[0] - hire_cost[0];
    int nn = static_cast<int>(npow.size());
    for (int m = 1; m < nn; ++m) {
        double val = coef * npow[m] - hire_cost[m];
        if (val > best) {
            best = val;
            besti = m;
        }
    }
    *best_value = best;
    return besti;
}

} // namespace detail

// Static firm problem for one state: grid search over (k, n) under the
// collateral constraint k <= (1+d)(a - tau + psi). The borrowing rate
// applies only to k > a. An empty feasible set falls back to the k = 0
// corner. Candidates are grid points only, so enlarging the cap (a bigger
// prize, a looser d) can only move the argmax rightward.
inline FirmChoice entrepreneur_profit(double a, double theta, double eta, double psi,
                                      const Prices& prices, const ModelConfig& cfg,
                                      const StateGrid& grid) {
    const double av = cfg.technology.alpha * cfg.technology.v;
    const double lv = (1.0 - cfg.technology.alpha) * cfg.technology.v;
    const double tau = cfg.ticket_price();
    const int nn = static_cast<int>(grid.n_grid.size());
    const int nk = static_cast<int>(grid.k_grid.size());

    std::vector<double> npow(nn), hire_cost(nn);
    for (int m = 0; m < nn; ++m) {
        double n = grid.n_grid[m];
        npow[m] = n > 0.0 ? std::pow(n, lv) : 0.0;
        hire_cost[m] = prices.w * std::max(n - eta, 0.0);
    }

    double cap = (1.0 + cfg.credit.d) * (a - tau + psi);
    double best_pt = (1.0 + prices.r) * a;  // k = 0 corner
    double best_k = 0.0, best_n = 0.0;
    for (int j = 0; j < nk && grid.k_grid[j] <= cap; ++j) {
        double k = grid.k_grid[j];
        double coef = k > 0.0 ? theta * std::pow(k, av) : 0.0;
        double h;
        int m = detail::best_labor_index(coef, npow, hire_cost, &h);
        double rt = k <= a ? prices.r : prices.r + cfg.credit.iota;
        double pt = h + (1.0 - cfg.technology.delta) * k - (1.0 + rt) * (k - a);
        if (pt > best_pt) {
            best_pt = pt;
            best_k = k;
            best_n = grid.n_grid[m];
        }
    }
    FirmChoice out;
    out.capital = best_k;
    out.labor = best_n;
    out.profit_pretax = best_pt;
    // Taxable income nets out the principal: I = PT - a - tau + psi.
    out.profit_after_tax = best_pt - income_tax(best_pt - a - tau + psi, cfg.tax);
    return out;
}

// Continuation values E V(a', theta', eta', psi') marginalized over
// tomorrow's shocks; indexed (theta*Ne + eta)*Na + a'. Prizes are i.i.d.
inline void expected_continuation(const ValueTables& V, const StateGrid& grid,
                                  const MarkovChain& theta_chain, const MarkovChain& eta_chain,
                                  std::vector<double>& evw, std::vector<double>& eve) {
    const int nt = grid.n_theta, ne = grid.n_eta, np = grid.n_prizes, na = grid.n_assets;
    static thread_local std::vector<double> vbar_w, vbar_e, mix_w, mix_e;
    vbar_w.assign(nt * ne * na, 0.0);
    vbar_e.assign(nt * ne * na, 0.0);
    mix_w.assign(nt * ne * na, 0.0);
    mix_e.assign(nt * ne * na, 0.0);
    evw.assign(nt * ne * na, 0.0);
    eve.assign(nt * ne * na, 0.0);

    // prize marginal
    for (int it = 0; it < nt; ++it)
        for (int ie = 0; ie < ne; ++ie) {
            double* bw = &vbar_w[(it * ne + ie) * na];
            double* be = &vbar_e[(it * ne + ie) * na];
            for (int ip = 0; ip < np; ++ip) {
                double p = grid.prize_probs[ip];
                const double* vw = &V.worker[grid.state_index(it, ie, ip, 0)];
                const double* ve = &V.entre[grid.state_index(it, ie, ip, 0)];
                for (int ia = 0; ia < na; ++ia) {
                    bw[ia] += p * vw[ia];
                    be[ia] += p * ve[ia];
                }
            }
        }
    // eta mixing
    for (int it = 0; it < nt; ++it)
        for (int ie = 0; ie < ne; ++ie) {
            double* mw = &mix_w[(it * ne + ie) * na];
            double* me = &mix_e[(it * ne + ie) * na];
            for (int je = 0; je < ne; ++je) {
                double p = eta_chain.P[ie][je];
                if (p == 0.0) continue;
                const double* bw = &vbar_w[(it * ne + je) * na];
                const double* be = &vbar_e[(it * ne + je) * na];
                for (int ia = 0; ia < na; ++ia) {
                    mw[ia] += p * bw[ia];
                    me[ia] += p * be[ia];
                }
            }
        }
    // theta mixing
    for (int it = 0; it < nt; ++it)
        for (int ie = 0; ie < ne; ++ie) {
            double* w = &evw[(it * ne + ie) * na];
            double* e = &eve[(it * ne + ie) * na];
            for (int jt = 0; jt < nt; ++jt) {
                double p = theta_chain.P[it][jt];
                if (p == 0.0) continue;
                const double* mw = &mix_w[(jt * ne + ie) * na];
                const double* me = &mix_e[(jt * ne + ie) * na];
                for (int ia = 0; ia < na; ++ia) {
                    w[ia] += p * mw[ia];
                    e[ia] += p * me[ia];
                }
            }
        }
}

// Precomputed per-price workspace: the static firm problem and after-tax
// resources are independent of the continuation values, so they are built
// once and reused across Bellman sweeps.
class HouseholdProblem {
public:
    HouseholdProblem(const ModelConfig& cfg, const StateGrid& grid, const Prices& prices)
        : cfg_(cfg), grid_(grid), prices_(prices) {
        build_firm_tables();
        build_resources();
    }

    const StateGrid& grid() const { return grid_; }
    const ModelConfig& config() const { return cfg_; }
    const Prices& prices() const { return prices_; }

    const std::vector<double>& firm_capital() const { return firm_k_; }
    const std::vector<double>& firm_labor() const { return firm_n_; }
    const std::vector<double>& profit_after_tax() const { return firm_pi_; }
    const std::vector<double>& profit_pretax() const { return firm_pt_; }
    const std::vector<double>& resources(int occ) const { return occ == Worker ? rw_ : re_; }

    // One maximization sweep: V_out = T(V_in), greedy policies extracted.
    void bellman(const ValueTables& in, ValueTables& out, PolicySet& pol, long* floored) const {
        expected_continuation(in, grid_, cfg_.theta_chain, cfg_.eta_chain, evw_, eve_);
        build_best_continuation();
        const double sigma = cfg_.preferences.sigma;
        if (sigma == 2.0) sweep<2>(out, pol, floored);
        else if (sigma == 1.0) sweep<1>(out, pol, floored);
        else sweep<0>(out, pol, floored);
    }

    // Policy evaluation at fixed decision rules (modified policy iteration).
    void evaluate_policy(ValueTables& V, const PolicySet& pol) const {
        expected_continuation(V, grid_, cfg_.theta_chain, cfg_.eta_chain, evw_, eve_);
        const int na = grid_.n_assets, np = grid_.n_prizes;
        const double beta = cfg_.preferences.beta;
        const int nexo = grid_.n_exo();
        parallel_for(2 * nexo * np, [&](std::int64_t slice) {
            int occ = static_cast<int>(slice / (nexo * np));
            int rest = static_cast<int>(slice % (nexo * np));
            int te = rest / np, ip = rest % np;
            int base = (te * np + ip) * na;
            std::vector<double>& tab = occ == Worker ? V.worker : V.entre;
            const double* cont_w = &evw_[te * na];
            const double* cont_e = &eve_[te * na];
            for (int ia = 0; ia < na; ++ia) {
                int s = base + ia;
                int ja = static_cast<int>(pol.savings_index[occ][s]);
                double cont = pol.next_worker[occ][s] ? cont_w[ja] : cont_e[ja];
                tab[s] = ucache_[occ][s] + beta * cont;
            }
        });
    }

private:
    template <int SigmaCase>
    static double u_of(double c, double sigma) {
        if constexpr (SigmaCase == 2) return -1.0 / c;
        else if constexpr (SigmaCase == 1) return std::log(c);
        else return std::pow(c, 1.0 - sigma) / (1.0 - sigma);
    }

    template <int SigmaCase>
    void sweep(ValueTables& out, PolicySet& pol, long* floored) const {
        const int na = grid_.n_assets, np = grid_.n_prizes;
        const int nexo = grid_.n_exo();
        const double beta = cfg_.preferences.beta;
        const double sigma = cfg_.preferences.sigma;
        const double inv_ptc = 1.0 / (1.0 + cfg_.tax.tau_c);
        const double cfloor = cfg_.numerics.consumption_floor;
        const auto& assets = grid_.assets;
        if (static_cast<int>(out.worker.size()) != grid_.n_states()) out.resize(grid_.n_states());
        if (static_cast<int>(pol.firm_capital.size()) != grid_.n_states()) pol.resize(grid_.n_states());
        for (int occ = 0; occ < 2; ++occ) {
            ucache_[occ].resize(grid_.n_states());
        }
        std::vector<long> floor_partial(2 * nexo * np, 0);
        parallel_for(2 * nexo * np, [&](std::int64_t slice) {
            int occ = static_cast<int>(slice / (nexo * np));
            int rest = static_cast<int>(slice % (nexo * np));
            int te = rest / np, ip = rest % np;
            int base = (te * np + ip) * na;
            const std::vector<double>& R = occ == Worker ? rw_ : re_;
            std::vector<double>& tab = occ == Worker ? out.worker : out.entre;
            const double* cont = &evbest_[te * na];
            const std::uint8_t* pref_w = &prefer_worker_[te * na];
            long nfloor = 0;
            for (int ia = 0; ia < na; ++ia) {
                int s = base + ia;
                double res = R[s];
                double best = 0.0;
                int bestj = -1;
                for (int ja = 0; ja < na; ++ja) {
                    if (assets[ja] >= res) break;
                    double c = (res - assets[ja]) * inv_ptc;
                    double val = u_of<SigmaCase>(c, sigma) + beta * cont[ja];
                    if (bestj < 0 || val > best) {
                        best = val;
                        bestj = ja;
                    }
                }
                if (bestj < 0) {
                    // no feasible choice: consumption floor at zero savings
                    bestj = 0;
                    pol.consumption[occ][s] = cfloor;
                    pol.floored[occ][s] = 1;
                    best = u_of<SigmaCase>(cfloor, sigma) + beta * cont[0];
                    ++nfloor;
                } else {
                    pol.consumption[occ][s] = (res - assets[bestj]) * inv_ptc;
                    pol.floored[occ][s] = 0;
                }
                pol.savings_index[occ][s] = static_cast<std::uint32_t>(bestj);
                pol.next_worker[occ][s] = pref_w[bestj];
                ucache_[occ][s] = u_of<SigmaCase>(pol.consumption[occ][s], sigma);
                tab[s] = best;
            }
            floor_partial[slice] = nfloor;
        });
        if (floored) {
            long total = 0;
            for (long f : floor_partial) total += f;
            *floored = total;
        }
        // the firm problem is part of the policy set
        pol.firm_capital = firm_k_;
        pol.firm_labor = firm_n_;
        pol.profit_after_tax = firm_pi_;
        pol.profit_pretax = firm_pt_;
    }

    void build_best_continuation() const {
        const int n = grid_.n_exo() * grid_.n_assets;
        evbest_.resize(n);
        prefer_worker_.resize(n);
        for (int i = 0; i < n; ++i) {
            // ties go to the worker occupation
            bool w = evw_[i] >= eve_[i];
            prefer_worker_[i] = w ? 1 : 0;
            evbest_[i] = w ? evw_[i] : eve_[i];
        }
    }

    void build_firm_tables() {
        const int nt = grid_.n_theta, ne = grid_.n_eta, np = grid_.n_prizes, na = grid_.n_assets;
        const int nk = static_cast<int>(grid_.k_grid.size());
        const int nn = static_cast<int>(grid_.n_grid.size());
        const double av = cfg_.technology.alpha * cfg_.technology.v;
        const double lv = (1.0 - cfg_.technology.alpha) * cfg_.technology.v;
        const double tau = cfg_.ticket_price();
        const double r = prices_.r, w = prices_.w;
        const double iota = cfg_.credit.iota, d = cfg_.credit.d, delta = cfg_.technology.delta;

        firm_k_.assign(grid_.n_states(), 0.0);
        firm_n_.assign(grid_.n_states(), 0.0);
        firm_pi_.assign(grid_.n_states(), 0.0);
        firm_pt_.assign(grid_.n_states(), 0.0);

        std::vector<double> npow(nn), kpow(nk);
        for (int m = 0; m < nn; ++m)
            npow[m] = grid_.n_grid[m] > 0.0 ? std::pow(grid_.n_grid[m], lv) : 0.0;
        for (int j = 0; j < nk; ++j)
            kpow[j] = grid_.k_grid[j] > 0.0 ? std::pow(grid_.k_grid[j], av) : 0.0;

        parallel_for(nt * ne, [&](std::int64_t te) {
            int it = static_cast<int>(te) / ne, ie = static_cast<int>(te) % ne;
            double theta = grid_.theta_values[it];
            double eta = grid_.eta_values[ie];
            std::vector<double> hire_cost(nn), hbest(nk);
            std::vector<int> nbest(nk);
            for (int m = 0; m < nn; ++m) hire_cost[m] = w * std::max(grid_.n_grid[m] - eta, 0.0);
            for (int j = 0; j < nk; ++j)
                nbest[j] = detail::best_labor_index(theta * kpow[j], npow, hire_cost, &hbest[j]);
            for (int ip = 0; ip < np; ++ip) {
                double psi = grid_.prizes[ip];
                for (int ia = 0; ia < na; ++ia) {
                    double a = grid_.assets[ia];
                    double cap = (1.0 + d) * (a - tau + psi);
                    double best_pt = (1.0 + r) * a;
                    double best_k = 0.0, best_n = 0.0;
                    for (int j = 0; j < nk && grid_.k_grid[j] <= cap; ++j) {
                        double k = grid_.k_grid[j];
                        double rt = k <= a ? r : r + iota;
                        double pt = hbest[j] + (1.0 - delta) * k - (1.0 + rt) * (k - a);
                        if (pt > best_pt) {
                            best_pt = pt;
                            best_k = k;
                            best_n = grid_.n_grid[nbest[j]];
                        }
                    }
                    int s = grid_.state_index(it, ie, ip, ia);
                    firm_k_[s] = best_k;
                    firm_n_[s] = best_n;
                    firm_pt_[s] = best_pt;
                    firm_pi_[s] = best_pt - income_tax(best_pt - a - tau + psi, cfg_.tax);
                }
            }
        });
    }

    void build_resources() {
        const int nt = grid_.n_theta, ne = grid_.n_eta, np = grid_.n_prizes, na = grid_.n_assets;
        const double tau = cfg_.ticket_price();
        rw_.assign(grid_.n_states(), 0.0);
        re_.assign(grid_.n_states(), 0.0);
        for (int it = 0; it < nt; ++it)
            for (int ie = 0; ie < ne; ++ie) {
                double eta = grid_.eta_values[ie];
                for (int ip = 0; ip < np; ++ip) {
                    double psi = grid_.prizes[ip];
                    for (int ia = 0; ia < na; ++ia) {
                        double a = grid_.assets[ia];
                        int s = grid_.state_index(it, ie, ip, ia);
                        double income = eta * prices_.w + prices_.r * a + psi - tau;
                        rw_[s] = eta * prices_.w + (1.0 + prices_.r) * a + psi - tau -
                                 income_tax(income, cfg_.tax);
                        re_[s] = firm_pi_[s] + psi - tau;
                    }
                }
            }
    }

    const ModelConfig& cfg_;
    const StateGrid& grid_;
    Prices prices_;
    std::vector<double> firm_k_, firm_n_, firm_pi_, firm_pt_;
    std::vector<double> rw_, re_;
    mutable std::vector<double> evw_, eve_, evbest_;
    mutable std::vector<std::uint8_t> prefer_worker_;
    mutable std::array<std::vector<double>, 2> ucache_;
};

// One application of the Bellman operator with greedy policies.
inline std::pair<ValueTables, PolicySet> bellman_update(const ValueTables& V, const Prices& prices,
                                                        const ModelConfig& cfg, const StateGrid& grid) {
    HouseholdProblem prob(cfg, grid, prices);
    ValueTables out;
    PolicySet pol;
    long floored = 0;
    prob.bellman(V, out, pol, &floored);
    return {std::move(out), std::move(pol)};
}

// Value function iteration to the configured sup-norm tolerance, with
// optional Howard policy-evaluation steps between maximizations.
inline HouseholdSolution solve_household(const Prices& prices, const ModelConfig& cfg,
                                         const StateGrid& grid,
                                         const ValueTables* v_init = nullptr) {
    HouseholdProblem prob(cfg, grid, prices);
    const int n = grid.n_states();
    HouseholdSolution sol;
    ValueTables V;
    if (v_init) {
        V = *v_init;
    } else {
        // start from the stay-put consumption value
        V.resize(n);
        const double inv_ptc = 1.0 / (1.0 + cfg.tax.tau_c);
        const double perpetuity = 1.0 / (1.0 - cfg.preferences.beta);
        for (int occ = 0; occ < 2; ++occ) {
            const auto& R = prob.resources(occ);
            auto& tab = occ == Worker ? V.worker : V.entre;
            for (int it = 0; it < grid.n_theta; ++it)
                for (int ie = 0; ie < grid.n_eta; ++ie)
                    for (int ip = 0; ip < grid.n_prizes; ++ip)
                        for (int ia = 0; ia < grid.n_assets; ++ia) {
                            int s = grid.state_index(it, ie, ip, ia);
                            double c = (R[s] - grid.assets[ia]) * inv_ptc;
                            if (!(c > 0.0)) c = cfg.numerics.consumption_floor;
                            tab[s] = utility(c, cfg.preferences) * perpetuity;
                        }
        }
    }

    ValueTables next;
    next.resize(n);
    long floored = 0;
    for (int iter = 1; iter <= cfg.numerics.vfi_max_iter; ++iter) {
        prob.bellman(V, next, sol.policies, &floored);
        double resid = 0.0;
        for (int s = 0; s < n; ++s) {
            resid = std::max(resid, std::fabs(next.worker[s] - V.worker[s]));
            resid = std::max(resid, std::fabs(next.entre[s] - V.entre[s]));
        }
        sol.diagnostics.residuals.push_back(resid);
        sol.diagnostics.iterations = iter;
        std::swap(V.worker, next.worker);
        std::swap(V.entre, next.entre);
        if (resid < cfg.numerics.vfi_tol) {
            sol.values = std::move(V);
            sol.diagnostics.floored_states = floored;
            return sol;
        }
        for (int h = 0; h < cfg.numerics.howard_steps; ++h) prob.evaluate_policy(V, sol.policies);
    }
    throw ConvergenceError("solve_household: value function iteration hit the cap of " +
                               std::to_string(cfg.numerics.vfi_max_iter) + " iterations",
                           sol.diagnostics.residuals.empty() ? 0.0 : sol.diagnostics.residuals.back());
}

} // namespace lotecon
