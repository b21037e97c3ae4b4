#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "lotecon/distribution.hpp"
#include "lotecon/grids.hpp"
#include "lotecon/household.hpp"
#include "lotecon/model.hpp"

namespace lotecon {

struct Aggregates {
    double total_assets = 0.0;       // integral of a
    double entre_capital = 0.0;      // integral of k over entrepreneurs
    double corp_capital = 0.0;       // total_assets - entre_capital
    double worker_labor = 0.0;       // integral of eta over workers
    double entre_hired_labor = 0.0;  // integral of max(n - eta, 0) over entrepreneurs
    double corp_labor = 0.0;         // worker_labor - entre_hired_labor
    double corp_output = 0.0;
    double entre_output = 0.0;
    double total_output = 0.0;
    double consumption = 0.0;
    double government = 0.0;          // tau_c c + T(I), integrated
    double income_tax_revenue = 0.0;
    double consumption_tax_revenue = 0.0;
    double worker_income = 0.0;       // taxable income, workers
    double entre_income = 0.0;        // taxable income, entrepreneurs

    bool feasible() const { return corp_capital > 0.0 && corp_labor > 0.0; }
};

struct ThetaActivityRow {
    double theta = 0.0;
    double population_share = 0.0;   // entrepreneur mass at this theta
    double entrepreneur_share = 0.0; // share of all entrepreneurs
    double mean_investment = 0.0;
    double mean_assets = 0.0;
    double mean_leverage = 0.0;
};

struct PrizeLeverageRow {
    double prize = 0.0;
    double mean_leverage = 0.0;
    double entrepreneur_mass = 0.0;
};

struct MomentsReport {
    double aggregate_output = 0.0;
    double aggregate_capital = 0.0;             // total household assets
    double aggregate_capital_productive = 0.0;  // corporate plus entrepreneurial capital
    double aggregate_consumption = 0.0;
    double capital_output_ratio = 0.0;
    double govt_expenditure_share = 0.0;
    double income_tax_share = 0.0;
    double entrepreneur_fraction = 0.0;
    double entrepreneur_income_share = 0.0;
    double entrepreneur_asset_share = 0.0;
    double entrepreneur_investment_share = 0.0;
    double exit_rate = 0.0;
    double tau = 0.0;
    double tau_output_share = 0.0;
    double top_asset_mass = 0.0;
    std::vector<ThetaActivityRow> theta_table;
    std::vector<PrizeLeverageRow> leverage_by_prize;
};

struct Equilibrium {
    ModelConfig config;  // resolved: lottery prizes rescaled to the cleared tau
    StateGrid grid;
    Prices prices;
    double k_over_l = 0.0;
    double tau = 0.0;
    ValueTables values;
    PolicySet policies;
    Distribution phi;
    Aggregates aggregates;
    MomentsReport moments;
    int outer_iterations = 0;
    double top_asset_mass = 0.0;
};

// Integrates policies against the distribution. Corporate factors are the
// residuals of household supply net of entrepreneurial use.
inline Aggregates compute_aggregates(const Distribution& phi, const PolicySet& pol,
                                     const StateGrid& grid, const Prices& prices,
                                     const ModelConfig& cfg) {
    if (phi.n_states != grid.n_states())
        throw ValidationError("compute_aggregates: distribution/grid mismatch");
    const int nt = grid.n_theta, ne = grid.n_eta, np = grid.n_prizes, na = grid.n_assets;
    const double tau = cfg.ticket_price();
    Aggregates ag;
    for (int it = 0; it < nt; ++it)
        for (int ie = 0; ie < ne; ++ie) {
            double eta = grid.eta_values[ie];
            double theta = grid.theta_values[it];
            for (int ip = 0; ip < np; ++ip) {
                double psi = grid.prizes[ip];
                for (int ia = 0; ia < na; ++ia) {
                    int s = grid.state_index(it, ie, ip, ia);
                    double a = grid.assets[ia];
                    double mw = phi.at(Worker, s);
                    double me = phi.at(Entrepreneur, s);
                    double m = mw + me;
                    if (m == 0.0) continue;
                    ag.total_assets += m * a;
                    ag.consumption += mw * pol.consumption[Worker][s] + me * pol.consumption[Entrepreneur][s];
                    if (mw > 0.0) {
                        ag.worker_labor += mw * eta;
                        double iw = eta * prices.w + prices.r * a + psi - tau;
                        ag.worker_income += mw * iw;
                        ag.income_tax_revenue += mw * income_tax(iw, cfg.tax);
                    }
                    if (me > 0.0) {
                        double k = pol.firm_capital[s];
                        double n = pol.firm_labor[s];
                        ag.entre_capital += me * k;
                        ag.entre_hired_labor += me * std::max(n - eta, 0.0);
                        ag.entre_output += me * entrepreneur_output(k, n, theta, cfg.technology);
                        double ient = pol.profit_pretax[s] - a - tau + psi;
                        ag.entre_income += me * ient;
                        ag.income_tax_revenue += me * income_tax(ient, cfg.tax);
                    }
                }
            }
        }
    ag.corp_capital = ag.total_assets - ag.entre_capital;
    ag.corp_labor = ag.worker_labor - ag.entre_hired_labor;
    ag.corp_output = ag.feasible() ? corporate_output(ag.corp_capital, ag.corp_labor, cfg.technology) : 0.0;
    ag.total_output = ag.corp_output + ag.entre_output;
    ag.consumption_tax_revenue = cfg.tax.tau_c * ag.consumption;
    ag.government = ag.income_tax_revenue + ag.consumption_tax_revenue;
    return ag;
}

// Leverage is borrowing measured against pledgeable net worth
// z = a - tau + psi: max(k - z, 0)/z. With no lottery z = a, and a binding
// collateral constraint gives exactly d.
inline double leverage_ratio(double k, double a, double tau, double psi) {
    if (!(k > 0.0)) return 0.0;
    double z = a - tau + psi;
    if (!(z > 0.0)) return 0.0;
    return std::max(k - z, 0.0) / z;
}

inline MomentsReport compute_moments(const Distribution& phi, const PolicySet& pol,
                                     const StateGrid& grid, const ModelConfig& cfg,
                                     const Aggregates& ag) {
    const int nt = grid.n_theta, ne = grid.n_eta, np = grid.n_prizes, na = grid.n_assets;
    const double tau = cfg.ticket_price();
    MomentsReport m;
    m.aggregate_output = ag.total_output;
    m.aggregate_capital = ag.total_assets;
    m.aggregate_capital_productive = ag.corp_capital + ag.entre_capital;
    m.aggregate_consumption = ag.consumption;
    m.capital_output_ratio = ag.total_assets / ag.total_output;
    m.govt_expenditure_share = ag.government / ag.total_output;
    m.income_tax_share = ag.income_tax_revenue / ag.government;
    m.tau = tau;
    m.tau_output_share = tau / ag.total_output;

    double frac = occupation_mass(phi, grid, Entrepreneur);
    m.entrepreneur_fraction = frac;
    double total_income = ag.worker_income + ag.entre_income;
    m.entrepreneur_income_share = total_income != 0.0 ? ag.entre_income / total_income : 0.0;

    double exit_mass = 0.0, entre_assets = 0.0;
    std::vector<ThetaActivityRow> rows(nt);
    std::vector<PrizeLeverageRow> prows(np);
    std::vector<double> row_k(nt, 0.0), row_a(nt, 0.0), row_lev(nt, 0.0);
    for (int it = 0; it < nt; ++it) rows[it].theta = grid.theta_values[it];
    for (int ip = 0; ip < np; ++ip) prows[ip].prize = grid.prizes[ip];
    for (int it = 0; it < nt; ++it)
        for (int ie = 0; ie < ne; ++ie)
            for (int ip = 0; ip < np; ++ip) {
                double psi = grid.prizes[ip];
                for (int ia = 0; ia < na; ++ia) {
                    int s = grid.state_index(it, ie, ip, ia);
                    double me = phi.at(Entrepreneur, s);
                    if (me == 0.0) continue;
                    double a = grid.assets[ia];
                    double k = pol.firm_capital[s];
                    double lev = leverage_ratio(k, a, tau, psi);
                    if (pol.next_worker[Entrepreneur][s]) exit_mass += me;
                    entre_assets += me * a;
                    rows[it].population_share += me;
                    row_k[it] += me * k;
                    row_a[it] += me * a;
                    row_lev[it] += me * lev;
                    prows[ip].entrepreneur_mass += me;
                    prows[ip].mean_leverage += me * lev;
                }
            }
    m.exit_rate = frac > 0.0 ? exit_mass / frac : 0.0;
    m.entrepreneur_asset_share = ag.total_assets > 0.0 ? entre_assets / ag.total_assets : 0.0;
    m.entrepreneur_investment_share = ag.total_assets > 0.0 ? ag.entre_capital / ag.total_assets : 0.0;
    for (int it = 0; it < nt; ++it) {
        double pm = rows[it].population_share;
        rows[it].entrepreneur_share = frac > 0.0 ? pm / frac : 0.0;
        if (pm > 0.0) {
            rows[it].mean_investment = row_k[it] / pm;
            rows[it].mean_assets = row_a[it] / pm;
            rows[it].mean_leverage = row_lev[it] / pm;
        }
    }
    for (int ip = 0; ip < np; ++ip)
        if (prows[ip].entrepreneur_mass > 0.0) prows[ip].mean_leverage /= prows[ip].entrepreneur_mass;
    m.theta_table = std::move(rows);
    m.leverage_by_prize = std::move(prows);
    return m;
}

inline MomentsReport compute_moments(const Equilibrium& eq) {
    return compute_moments(eq.phi, eq.policies, eq.grid, eq.config, eq.aggregates);
}

struct DeltaRow {
    std::string name;
    double base = 0.0;
    double other = 0.0;
    double pct_change = 0.0;  // (other - base)/|base| * 100
};

struct DeltaReport {
    std::vector<DeltaRow> rows;
};

// Percentage changes of the headline moments, second economy vs first.
inline DeltaReport compare_steady_states(const MomentsReport& a, const MomentsReport& b) {
    auto pct = [](double base, double other) {
        return base != 0.0 ? (other - base) / std::fabs(base) * 100.0 : 0.0;
    };
    DeltaReport rep;
    auto add = [&](const std::string& name, double va, double vb) {
        rep.rows.push_back({name, va, vb, pct(va, vb)});
    };
    add("aggregate output", a.aggregate_output, b.aggregate_output);
    add("aggregate capital (assets)", a.aggregate_capital, b.aggregate_capital);
    add("aggregate capital (productive)", a.aggregate_capital_productive, b.aggregate_capital_productive);
    add("aggregate consumption", a.aggregate_consumption, b.aggregate_consumption);
    add("capital-output ratio", a.capital_output_ratio, b.capital_output_ratio);
    add("government expenditure/GDP", a.govt_expenditure_share, b.govt_expenditure_share);
    add("income tax/total tax revenue", a.income_tax_share, b.income_tax_share);
    add("fraction of entrepreneurs", a.entrepreneur_fraction, b.entrepreneur_fraction);
    add("share of entrepreneur's income", a.entrepreneur_income_share, b.entrepreneur_income_share);
    add("share of entrepreneur's asset", a.entrepreneur_asset_share, b.entrepreneur_asset_share);
    add("share of entrepreneur's investment", a.entrepreneur_investment_share, b.entrepreneur_investment_share);
    add("exit rate", a.exit_rate, b.exit_rate);
    return rep;
}

inline DeltaReport compare_steady_states(const Equilibrium& a, const Equilibrium& b) {
    if (!a.grid.same_axes(b.grid))
        throw ValidationError("compare_steady_states: incompatible grids (asset or firm axes differ)");
    return compare_steady_states(a.moments, b.moments);
}

struct EquilibriumHooks {
    // Called after every outer iterate with the current best equilibrium.
    std::function<void(const Equilibrium&, int)> on_outer_iterate;
    std::function<void(const std::string&)> on_log;
};

namespace detail {

struct MarketEvaluation {
    Prices prices;
    HouseholdSolution household;
    DistributionResult dist;
    Aggregates aggregates;
    double implied_kl = 0.0;
    // signed stand-ins when corporate factors go infeasible
    bool capital_infeasible = false;
    bool labor_infeasible = false;
};

inline MarketEvaluation evaluate_market(double k_over_l, const ModelConfig& cfg,
                                        const StateGrid& grid, const ValueTables* warm) {
    MarketEvaluation ev;
    ev.prices = factor_prices(k_over_l, cfg.technology);
    ev.household = solve_household(ev.prices, cfg, grid, warm);
    ev.dist = invariant_distribution(ev.household.policies, cfg, grid);
    ev.aggregates = compute_aggregates(ev.dist.phi, ev.household.policies, grid, ev.prices, cfg);
    if (ev.aggregates.corp_capital <= 0.0) {
        ev.capital_infeasible = true;
        ev.implied_kl = 0.0;  // capital over-demanded: the ratio must fall
    } else if (ev.aggregates.corp_labor <= 0.0) {
        ev.labor_infeasible = true;
        ev.implied_kl = std::numeric_limits<double>::infinity();  // labor over-demanded: the ratio must rise
    } else {
        ev.implied_kl = ev.aggregates.corp_capital / ev.aggregates.corp_labor;
    }
    return ev;
}

inline Equilibrium make_equilibrium(const ModelConfig& cfg, const StateGrid& grid, double x,
                                    MarketEvaluation&& ev, int outer_iters) {
    Equilibrium eq;
    eq.config = cfg;
    eq.grid = grid;
    eq.prices = ev.prices;
    eq.k_over_l = x;
    eq.tau = cfg.ticket_price();
    eq.values = std::move(ev.household.values);
    eq.policies = std::move(ev.household.policies);
    eq.phi = std::move(ev.dist.phi);
    eq.aggregates = ev.aggregates;
    eq.top_asset_mass = ev.dist.top_asset_mass;
    eq.moments = compute_moments(eq.phi, eq.policies, grid, cfg, eq.aggregates);
    eq.moments.top_asset_mass = eq.top_asset_mass;
    eq.outer_iterations = outer_iters;
    return eq;
}

// Bisection on the corporate capital-labor ratio. Returns the converged
// evaluation and the ratio it was evaluated at.
inline std::pair<double, MarketEvaluation> clear_factor_markets(const ModelConfig& cfg,
                                                                const StateGrid& grid,
                                                                ValueTables& warm_values,
                                                                bool have_warm,
                                                                const EquilibriumHooks& hooks) {
    const Numerics& num = cfg.numerics;
    double x_star = kl_ratio_for_rate(1.0 / cfg.preferences.beta - 1.0, cfg.technology);
    double lo = num.bracket_lo * x_star, hi = num.bracket_hi * x_star;

    auto excess = [](const MarketEvaluation& ev, double x) {
        if (ev.capital_infeasible) return -1.0;
        if (ev.labor_infeasible) return 1.0;
        return ev.implied_kl - x;
    };
    auto log = [&](const std::string& s) {
        if (hooks.on_log) hooks.on_log(s);
    };

    const ValueTables* warm = have_warm ? &warm_values : nullptr;
    MarketEvaluation ev_lo = evaluate_market(lo, cfg, grid, warm);
    warm_values = ev_lo.household.values;
    MarketEvaluation ev_hi = evaluate_market(hi, cfg, grid, &warm_values);
    warm_values = ev_hi.household.values;
    double g_lo = excess(ev_lo, lo), g_hi = excess(ev_hi, hi);
    for (int widen = 0; widen < 4 && g_lo * g_hi > 0.0; ++widen) {
        lo *= 0.5;
        hi *= 2.0;
        log("bracket widened to [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
        ev_lo = evaluate_market(lo, cfg, grid, &warm_values);
        warm_values = ev_lo.household.values;
        ev_hi = evaluate_market(hi, cfg, grid, &warm_values);
        warm_values = ev_hi.household.values;
        g_lo = excess(ev_lo, lo);
        g_hi = excess(ev_hi, hi);
    }
    if (g_lo * g_hi > 0.0)
        throw ConvergenceError("factor markets: no sign change on capital-labor bracket [" +
                                   std::to_string(lo) + ", " + std::to_string(hi) +
                                   "], excess demands " + std::to_string(g_lo) + " and " +
                                   std::to_string(g_hi),
                               std::min(std::fabs(g_lo), std::fabs(g_hi)));
    // an endpoint might already satisfy the residual criterion
    if (!ev_lo.capital_infeasible && !ev_lo.labor_infeasible &&
        std::fabs(ev_lo.implied_kl - lo) < num.kl_tol * lo)
        return {lo, std::move(ev_lo)};
    if (!ev_hi.capital_infeasible && !ev_hi.labor_infeasible &&
        std::fabs(ev_hi.implied_kl - hi) < num.kl_tol * hi)
        return {hi, std::move(ev_hi)};

    // Bisection down to a narrow bracket. The implied ratio is a step
    // function of the guess on a finite grid, so the residual criterion may
    // not be met before the bracket collapses; a fixed-point polish phase
    // (hopping to the implied value) then lands on a plateau within
    // tolerance.
    double last_x = 0.5 * (lo + hi);
    double last_implied = last_x;
    double best_resid = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < num.kl_max_iter; ++iter) {
        double x = 0.5 * (lo + hi);
        MarketEvaluation ev = evaluate_market(x, cfg, grid, &warm_values);
        warm_values = ev.household.values;
        double g = excess(ev, x);
        log("bisect " + std::to_string(iter) + ": K/L guess " + std::to_string(x) + ", implied " +
            std::to_string(ev.implied_kl) + ", r " + std::to_string(ev.prices.r));
        if (!ev.capital_infeasible && !ev.labor_infeasible) {
            double resid = std::fabs(ev.implied_kl - x) / x;
            if (resid < num.kl_tol) return {x, std::move(ev)};
            if (resid < best_resid) {
                best_resid = resid;
                last_x = x;
                last_implied = ev.implied_kl;
            }
        }
        if (g > 0.0) lo = x;
        else hi = x;
        if (hi - lo < 1e-9 * x) break;
    }
    double x = last_implied;
    for (int hop = 0; hop < 30; ++hop) {
        MarketEvaluation ev = evaluate_market(x, cfg, grid, &warm_values);
        warm_values = ev.household.values;
        log("polish " + std::to_string(hop) + ": K/L guess " + std::to_string(x) + ", implied " +
            std::to_string(ev.implied_kl));
        if (!ev.capital_infeasible && !ev.labor_infeasible) {
            double resid = std::fabs(ev.implied_kl - x) / x;
            if (resid < num.kl_tol) return {x, std::move(ev)};
            if (resid < best_resid) {
                best_resid = resid;
                last_x = x;
            }
            x = 0.5 * (x + ev.implied_kl);
        } else {
            x = 0.5 * (x + last_x);
        }
    }
    throw ConvergenceError("factor markets: could not meet the capital-labor tolerance", best_resid);
}

} // namespace detail

// Benchmark steady state: bisection on the capital-labor ratio. A
// previous solution's value tables can seed the iteration.
inline Equilibrium solve_benchmark(const ModelConfig& config, const EquilibriumHooks& hooks = {},
                                   const ValueTables* warm_start = nullptr) {
    if (config.has_lottery())
        throw ValidationError("solve_benchmark: config has a lottery sector; use solve_lottery");
    ModelConfig cfg = config;
    cfg.validate();
    StateGrid grid = StateGrid::build(cfg);
    ValueTables warm;
    bool have_warm = false;
    if (warm_start && warm_start->worker.size() == static_cast<std::size_t>(grid.n_states())) {
        warm = *warm_start;
        have_warm = true;
    }
    auto [x, ev] = detail::clear_factor_markets(cfg, grid, warm, have_warm, hooks);
    Equilibrium eq = detail::make_equilibrium(cfg, grid, x, std::move(ev), 1);
    if (hooks.on_outer_iterate) hooks.on_outer_iterate(eq, 0);
    return eq;
}

// Lottery steady state. With a revenue target the ticket price is updated
// by a damped fixed point tau <- (1-lambda) tau + lambda * share * Y and
// the prize unit is rescaled so the lottery stays balanced identically;
// without a target the ticket price is held fixed.
inline Equilibrium solve_lottery(const ModelConfig& config, const EquilibriumHooks& hooks = {},
                                 const ValueTables* warm_start = nullptr) {
    if (!config.has_lottery())
        throw ValidationError("solve_lottery: config has no lottery sector");
    ModelConfig cfg = config;
    cfg.validate();
    double tau = cfg.lottery->tau;
    cfg.lottery->rebalance_to(tau);

    ValueTables warm;
    bool have_warm = false;
    if (warm_start &&
        warm_start->worker.size() == static_cast<std::size_t>(StateGrid::build(cfg).n_states())) {
        warm = *warm_start;
        have_warm = true;
    }
    if (!cfg.lottery->revenue_share_target) {
        StateGrid grid = StateGrid::build(cfg);
        auto [x, ev] = detail::clear_factor_markets(cfg, grid, warm, have_warm, hooks);
        Equilibrium eq = detail::make_equilibrium(cfg, grid, x, std::move(ev), 1);
        if (hooks.on_outer_iterate) hooks.on_outer_iterate(eq, 0);
        return eq;
    }

    const double share = *cfg.lottery->revenue_share_target;
    const Numerics& num = cfg.numerics;
    for (int outer = 0; outer < num.tau_max_iter; ++outer) {
        cfg.lottery->rebalance_to(tau);
        StateGrid grid = StateGrid::build(cfg);
        auto [x, ev] = detail::clear_factor_markets(cfg, grid, warm, have_warm, hooks);
        have_warm = true;
        double y = ev.aggregates.total_output;
        double target = share * y;
        double resid = std::fabs(tau - target) / tau;
        if (hooks.on_log)
            hooks.on_log("outer " + std::to_string(outer) + ": tau " + std::to_string(tau) +
                         ", target " + std::to_string(target) + ", resid " + std::to_string(resid));
        Equilibrium eq = detail::make_equilibrium(cfg, grid, x, std::move(ev), outer + 1);
        if (hooks.on_outer_iterate) hooks.on_outer_iterate(eq, outer);
        if (resid < num.tau_tol) return eq;
        tau = (1.0 - num.tau_damping) * tau + num.tau_damping * target;
    }
    throw ConvergenceError("solve_lottery: revenue target loop hit the cap", 0.0);
}

} // namespace lotecon
