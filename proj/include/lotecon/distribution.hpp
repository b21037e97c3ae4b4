#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "lotecon/grids.hpp"
#include "lotecon/household.hpp"
#include "lotecon/model.hpp"
#include "lotecon/parallel.hpp"

namespace lotecon {

// Probability mass over (occupation, theta, eta, prize, asset) grid cells.
struct Distribution {
    std::vector<double> mass;  // [occ * n_states + state]
    int n_states = 0;

    void resize(int states) {
        n_states = states;
        mass.assign(2 * states, 0.0);
    }

    double& at(int occ, int state) { return mass[occ * n_states + state]; }
    double at(int occ, int state) const { return mass[occ * n_states + state]; }

    double total() const {
        double s = 0.0;
        for (double m : mass) s += m;
        return s;
    }
};

// Pushes mass one period forward: each cell moves to its policy-chosen
// asset index and next occupation, then mixes over (theta', eta', psi').
// Savings policies are grid-valued, so no interpolation splitting occurs.
inline Distribution transition_operator(const Distribution& phi, const PolicySet& pol,
                                        const ModelConfig& cfg, const StateGrid& grid) {
    const int nt = grid.n_theta, ne = grid.n_eta, np = grid.n_prizes, na = grid.n_assets;
    const int nexo = nt * ne;
    if (phi.n_states != grid.n_states() ||
        static_cast<int>(pol.savings_index[0].size()) != grid.n_states())
        throw ValidationError("transition_operator: distribution/policy grid mismatch");

    // Stage 1: within each source exo pair, land mass on (occ', a').
    // Indexed [occ' * nexo + te_source][a'].
    std::vector<double> landed(2 * nexo * na, 0.0);
    parallel_for(nexo, [&](std::int64_t te) {
        double* land_w = &landed[(Worker * nexo + te) * na];
        double* land_e = &landed[(Entrepreneur * nexo + te) * na];
        for (int occ = 0; occ < 2; ++occ)
            for (int ip = 0; ip < np; ++ip) {
                int base = (static_cast<int>(te) * np + ip) * na;
                for (int ia = 0; ia < na; ++ia) {
                    int s = base + ia;
                    double m = phi.at(occ, s);
                    if (m == 0.0) continue;
                    int ja = static_cast<int>(pol.savings_index[occ][s]);
                    if (pol.next_worker[occ][s]) land_w[ja] += m;
                    else land_e[ja] += m;
                }
            }
    });

    // Stage 2: mix exogenous states. theta first, then eta, then spread
    // over tomorrow's i.i.d. prizes.
    std::vector<double> theta_mixed(2 * nexo * na, 0.0);
    parallel_for(2 * nt, [&](std::int64_t idx) {
        int occ = static_cast<int>(idx) / nt;
        int jt = static_cast<int>(idx) % nt;
        for (int ie = 0; ie < ne; ++ie) {
            double* out = &theta_mixed[(occ * nexo + jt * ne + ie) * na];
            for (int it = 0; it < nt; ++it) {
                double p = cfg.theta_chain.P[it][jt];
                if (p == 0.0) continue;
                const double* src = &landed[(occ * nexo + it * ne + ie) * na];
                for (int ia = 0; ia < na; ++ia) out[ia] += p * src[ia];
            }
        }
    });

    Distribution next;
    next.resize(grid.n_states());
    parallel_for(2 * nexo, [&](std::int64_t idx) {
        int occ = static_cast<int>(idx) / nexo;
        int dest_te = static_cast<int>(idx) % nexo;
        int jt = dest_te / ne, je = dest_te % ne;
        static thread_local std::vector<double> eta_mixed;
        eta_mixed.assign(na, 0.0);
        for (int ie = 0; ie < ne; ++ie) {
            double p = cfg.eta_chain.P[ie][je];
            if (p == 0.0) continue;
            const double* src = &theta_mixed[(occ * nexo + jt * ne + ie) * na];
            for (int ia = 0; ia < na; ++ia) eta_mixed[ia] += p * src[ia];
        }
        for (int ip = 0; ip < np; ++ip) {
            double pp = grid.prize_probs[ip];
            double* out = &next.mass[occ * grid.n_states() + (dest_te * np + ip) * na];
            for (int ia = 0; ia < na; ++ia) out[ia] = pp * eta_mixed[ia];
        }
    });
    return next;
}

struct DistributionResult {
    Distribution phi;
    int iterations = 0;
    double top_asset_mass = 0.0;  // grid-too-small warning when above 1%
};

// Fixed point of the pushforward by iteration, L1 convergence metric.
// Starts from the product of exogenous stationary marginals with all mass
// at (Worker, lowest asset).
inline DistributionResult invariant_distribution(const PolicySet& pol, const ModelConfig& cfg,
                                                 const StateGrid& grid,
                                                 const Distribution* phi_init = nullptr) {
    const int nt = grid.n_theta, ne = grid.n_eta, np = grid.n_prizes, na = grid.n_assets;
    Distribution phi;
    if (phi_init) {
        phi = *phi_init;
    } else {
        phi.resize(grid.n_states());
        auto pi_theta = stationary_distribution(cfg.theta_chain);
        auto pi_eta = stationary_distribution(cfg.eta_chain);
        for (int it = 0; it < nt; ++it)
            for (int ie = 0; ie < ne; ++ie)
                for (int ip = 0; ip < np; ++ip)
                    phi.at(Worker, grid.state_index(it, ie, ip, 0)) =
                        pi_theta[it] * pi_eta[ie] * grid.prize_probs[ip];
    }

    DistributionResult out;
    for (int iter = 1; iter <= cfg.numerics.dist_max_iter; ++iter) {
        Distribution next = transition_operator(phi, pol, cfg, grid);
        double l1 = 0.0;
        for (std::size_t i = 0; i < phi.mass.size(); ++i)
            l1 += std::fabs(next.mass[i] - phi.mass[i]);
        phi.mass.swap(next.mass);
        out.iterations = iter;
        if (l1 < cfg.numerics.dist_tol) {
            out.phi = std::move(phi);
            for (int occ = 0; occ < 2; ++occ)
                for (int it = 0; it < nt; ++it)
                    for (int ie = 0; ie < ne; ++ie)
                        for (int ip = 0; ip < np; ++ip)
                            out.top_asset_mass += out.phi.at(occ, grid.state_index(it, ie, ip, na - 1));
            return out;
        }
    }
    throw ConvergenceError("invariant_distribution: histogram iteration hit the cap of " +
                               std::to_string(cfg.numerics.dist_max_iter) + " iterations",
                           0.0);
}

// Marginal helpers used by reports and tests.
inline std::vector<double> theta_marginal(const Distribution& phi, const StateGrid& g) {
    std::vector<double> out(g.n_theta, 0.0);
    for (int occ = 0; occ < 2; ++occ)
        for (int it = 0; it < g.n_theta; ++it)
            for (int ie = 0; ie < g.n_eta; ++ie)
                for (int ip = 0; ip < g.n_prizes; ++ip)
                    for (int ia = 0; ia < g.n_assets; ++ia)
                        out[it] += phi.at(occ, g.state_index(it, ie, ip, ia));
    return out;
}

inline std::vector<double> eta_marginal(const Distribution& phi, const StateGrid& g) {
    std::vector<double> out(g.n_eta, 0.0);
    for (int occ = 0; occ < 2; ++occ)
        for (int it = 0; it < g.n_theta; ++it)
            for (int ie = 0; ie < g.n_eta; ++ie)
                for (int ip = 0; ip < g.n_prizes; ++ip)
                    for (int ia = 0; ia < g.n_assets; ++ia)
                        out[ie] += phi.at(occ, g.state_index(it, ie, ip, ia));
    return out;
}

inline std::vector<double> prize_marginal(const Distribution& phi, const StateGrid& g) {
    std::vector<double> out(g.n_prizes, 0.0);
    for (int occ = 0; occ < 2; ++occ)
        for (int it = 0; it < g.n_theta; ++it)
            for (int ie = 0; ie < g.n_eta; ++ie)
                for (int ip = 0; ip < g.n_prizes; ++ip)
                    for (int ia = 0; ia < g.n_assets; ++ia)
                        out[ip] += phi.at(occ, g.state_index(it, ie, ip, ia));
    return out;
}

// Asset marginal by occupation (density over grid points).
inline std::vector<double> asset_marginal(const Distribution& phi, const StateGrid& g, int occ) {
    std::vector<double> out(g.n_assets, 0.0);
    for (int it = 0; it < g.n_theta; ++it)
        for (int ie = 0; ie < g.n_eta; ++ie)
            for (int ip = 0; ip < g.n_prizes; ++ip)
                for (int ia = 0; ia < g.n_assets; ++ia)
                    out[ia] += phi.at(occ, g.state_index(it, ie, ip, ia));
    return out;
}

inline double occupation_mass(const Distribution& phi, const StateGrid& g, int occ) {
    double s = 0.0;
    for (int i = 0; i < g.n_states(); ++i) s += phi.at(occ, i);
    return s;
}

} // namespace lotecon
