#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "lotecon/params.hpp"

namespace lotecon {

enum Occupation : int { Worker = 0, Entrepreneur = 1 };

// Discretized state space A x H x Theta x Psi x {W,E}. The benchmark
// economy collapses the prize dimension to the singleton {0}.
struct StateGrid {
    std::vector<double> assets;
    std::vector<double> eta_values;
    std::vector<double> theta_values;
    std::vector<double> prizes;       // {0} when there is no lottery
    std::vector<double> prize_probs;  // {1} when there is no lottery
    std::vector<double> k_grid;
    std::vector<double> n_grid;

    int n_assets = 0, n_eta = 0, n_theta = 0, n_prizes = 0;

    static StateGrid build(const ModelConfig& cfg) {
        StateGrid g;
        g.assets = make_axis(cfg.assets);
        g.eta_values = cfg.eta_chain.grid;
        g.theta_values = cfg.theta_chain.grid;
        if (cfg.lottery) {
            g.prizes = cfg.lottery->prizes;
            g.prize_probs = cfg.lottery->probs;
        } else {
            g.prizes = {0.0};
            g.prize_probs = {1.0};
        }
        g.k_grid = linspace(0.0, (1.0 + cfg.credit.d) * cfg.assets.max, cfg.firm.k_count);
        g.n_grid = linspace(0.0, cfg.firm.n_max, cfg.firm.n_count);
        g.n_assets = static_cast<int>(g.assets.size());
        g.n_eta = static_cast<int>(g.eta_values.size());
        g.n_theta = static_cast<int>(g.theta_values.size());
        g.n_prizes = static_cast<int>(g.prizes.size());
        return g;
    }

    // Flat layout: (((theta * Ne + eta) * Np + prize) * Na + asset).
    int n_exo() const { return n_theta * n_eta; }
    int n_states() const { return n_exo() * n_prizes * n_assets; }
    int exo_index(int itheta, int ieta) const { return itheta * n_eta + ieta; }
    int state_index(int itheta, int ieta, int iprize, int iasset) const {
        return ((itheta * n_eta + ieta) * n_prizes + iprize) * n_assets + iasset;
    }

    int nearest_asset_index(double a) const {
        int best = 0;
        double err = std::fabs(assets[0] - a);
        for (int i = 1; i < n_assets; ++i) {
            double e = std::fabs(assets[i] - a);
            if (e < err) { err = e; best = i; }
        }
        return best;
    }

    bool same_axes(const StateGrid& o) const {
        return assets == o.assets && eta_values == o.eta_values && theta_values == o.theta_values &&
               k_grid == o.k_grid && n_grid == o.n_grid;
    }

    static std::vector<double> linspace(double lo, double hi, int n) {
        std::vector<double> v(n);
        double step = (hi - lo) / (n - 1);
        for (int i = 0; i < n; ++i) v[i] = lo + step * i;
        v.back() = hi;
        return v;
    }

    static std::vector<double> make_axis(const AssetGridSpec& spec) {
        if (spec.spacing == GridSpacing::Linear) return linspace(spec.min, spec.max, spec.count);
        std::vector<double> v(spec.count);
        double llo = std::log(spec.min), lhi = std::log(spec.max);
        double step = (lhi - llo) / (spec.count - 1);
        for (int i = 0; i < spec.count; ++i) v[i] = std::exp(llo + step * i);
        v.front() = spec.min;
        v.back() = spec.max;
        return v;
    }
};

} // namespace lotecon
