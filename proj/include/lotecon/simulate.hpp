#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "lotecon/equilibrium.hpp"
#include "lotecon/grids.hpp"
#include "lotecon/parallel.hpp"
#include "lotecon/rng.hpp"

namespace lotecon {

struct SimConfig {
    std::int64_t n_households = 400000;
    int n_periods = 200;
    std::uint64_t rng_seed = 1;

    void validate() const {
        if (n_households < 1) throw ValidationError("simulate: n_households must be >= 1");
        if (n_periods < 2) throw ValidationError("simulate: n_periods must be >= 2");
    }
};

// Cross-section of household states at the start of a period.
struct PanelState {
    std::vector<std::uint32_t> asset_idx;
    std::vector<std::uint8_t> theta_idx, eta_idx, prize_idx, occupation;
    std::vector<double> prev_asset;  // beginning-of-period asset one period back
    int period = 1;
};

// Full records for one retained period.
struct PanelBlock {
    int period = 0;
    std::vector<double> a_lag, asset, psi, consumption, savings, capital, labor;
    std::vector<std::uint8_t> theta_idx, eta_idx, occupation, floored;

    void resize(std::int64_t n) {
        a_lag.resize(n); asset.resize(n); psi.resize(n); consumption.resize(n);
        savings.resize(n); capital.resize(n); labor.resize(n);
        theta_idx.resize(n); eta_idx.resize(n); occupation.resize(n); floored.resize(n);
    }
};

struct PeriodStats {
    int period = 0;
    double mean_assets = 0.0;
    double entrepreneur_fraction = 0.0;
    std::int64_t winners = 0;
};

struct Panel {
    SimConfig sim;
    double endowment = 0.0;  // period-1 asset position (grid-snapped mean assets)
    std::vector<PanelBlock> blocks;   // last two periods (one when n_periods == 2)
    std::vector<PeriodStats> series;  // per-period aggregates, periods 1..T
};

// Period-1 cross-section: theta and eta drawn from their stationary
// distributions, everyone a worker, assets at the steady-state mean
// (snapped to the policy grid), no prize.
inline PanelState init_panel(const SimConfig& sim, const Equilibrium& eq) {
    sim.validate();
    const StateGrid& g = eq.grid;
    PanelState st;
    st.period = 1;
    st.asset_idx.resize(sim.n_households);
    st.theta_idx.resize(sim.n_households);
    st.eta_idx.resize(sim.n_households);
    st.prize_idx.assign(sim.n_households, 0);
    st.occupation.assign(sim.n_households, static_cast<std::uint8_t>(Worker));
    st.prev_asset.resize(sim.n_households);

    double mean_assets = 0.0;
    for (int i = 0; i < g.n_states(); ++i) {
        int ia = i % g.n_assets;
        mean_assets += (eq.phi.at(Worker, i) + eq.phi.at(Entrepreneur, i)) * g.assets[ia];
    }
    std::uint32_t ia0 = static_cast<std::uint32_t>(g.nearest_asset_index(mean_assets));

    PanelRng rng(sim.rng_seed);
    auto theta_cdf = PanelRng::cumulative(stationary_distribution(eq.config.theta_chain));
    auto eta_cdf = PanelRng::cumulative(stationary_distribution(eq.config.eta_chain));
    parallel_for(sim.n_households, [&](std::int64_t hh) {
        st.asset_idx[hh] = ia0;
        st.prev_asset[hh] = g.assets[ia0];
        st.theta_idx[hh] = static_cast<std::uint8_t>(
            PanelRng::categorical(rng.uniform(hh, 1, PanelRng::VarTheta), theta_cdf));
        st.eta_idx[hh] = static_cast<std::uint8_t>(
            PanelRng::categorical(rng.uniform(hh, 1, PanelRng::VarEta), eta_cdf));
    });
    return st;
}

namespace detail {

struct ChainCdfs {
    std::vector<std::vector<double>> theta_rows, eta_rows;
    std::vector<double> prize;
};

inline ChainCdfs build_cdfs(const ModelConfig& cfg, const StateGrid& grid) {
    ChainCdfs c;
    for (const auto& row : cfg.theta_chain.P) c.theta_rows.push_back(PanelRng::cumulative(row));
    for (const auto& row : cfg.eta_chain.P) c.eta_rows.push_back(PanelRng::cumulative(row));
    c.prize = PanelRng::cumulative(grid.prize_probs);
    return c;
}

} // namespace detail

// Advances the cross-section one period: exogenous draws by inverse CDF,
// then decisions read off the policy tables at the realized state. When
// `record` is non-null the period's full records are captured.
inline void step_panel(PanelState& st, int period, const Equilibrium& eq, const PanelRng& rng,
                       const detail::ChainCdfs& cdfs, PanelBlock* record) {
    const StateGrid& g = eq.grid;
    const PolicySet& pol = eq.policies;
    const std::int64_t n = static_cast<std::int64_t>(st.asset_idx.size());
    if (record) {
        record->period = period;
        record->resize(n);
    }
    parallel_for(n, [&](std::int64_t hh) {
        int it = PanelRng::categorical(rng.uniform(hh, period, PanelRng::VarTheta),
                                       cdfs.theta_rows[st.theta_idx[hh]]);
        int ie = PanelRng::categorical(rng.uniform(hh, period, PanelRng::VarEta),
                                       cdfs.eta_rows[st.eta_idx[hh]]);
        int ip = PanelRng::categorical(rng.uniform(hh, period, PanelRng::VarPsi), cdfs.prize);
        int ia = static_cast<int>(st.asset_idx[hh]);
        int occ = st.occupation[hh];
        int s = g.state_index(it, ie, ip, ia);
        std::uint32_t ja = pol.savings_index[occ][s];
        bool worker_next = pol.next_worker[occ][s] != 0;
        if (record) {
            record->a_lag[hh] = st.prev_asset[hh];
            record->asset[hh] = g.assets[ia];
            record->psi[hh] = g.prizes[ip];
            record->consumption[hh] = pol.consumption[occ][s];
            record->savings[hh] = g.assets[ja];
            record->capital[hh] = occ == Entrepreneur ? pol.firm_capital[s] : 0.0;
            record->labor[hh] = occ == Entrepreneur ? pol.firm_labor[s] : 0.0;
            record->theta_idx[hh] = static_cast<std::uint8_t>(it);
            record->eta_idx[hh] = static_cast<std::uint8_t>(ie);
            record->occupation[hh] = static_cast<std::uint8_t>(occ);
            record->floored[hh] = pol.floored[occ][s];
        }
        st.prev_asset[hh] = g.assets[ia];
        st.asset_idx[hh] = ja;
        st.theta_idx[hh] = static_cast<std::uint8_t>(it);
        st.eta_idx[hh] = static_cast<std::uint8_t>(ie);
        st.prize_idx[hh] = static_cast<std::uint8_t>(ip);
        st.occupation[hh] = static_cast<std::uint8_t>(worker_next ? Worker : Entrepreneur);
    });
    st.period = period;
}

// Deterministic per-period aggregates: partial sums over fixed blocks,
// combined in block order. Assets and occupations are the period's
// beginning-of-period state; winners reflect the period's prize draws.
inline PeriodStats period_stats(const PanelState& pre_step, const PanelState& post_step,
                                const StateGrid& g, int period) {
    const std::int64_t n = static_cast<std::int64_t>(pre_step.asset_idx.size());
    const std::int64_t block = 4096;
    const std::int64_t nblocks = (n + block - 1) / block;
    std::vector<double> sum_a(nblocks, 0.0);
    std::vector<std::int64_t> cnt_e(nblocks, 0), cnt_w(nblocks, 0);
    parallel_for(nblocks, [&](std::int64_t b) {
        std::int64_t lo = b * block, hi = std::min(n, lo + block);
        double sa = 0.0;
        std::int64_t ce = 0, cw = 0;
        for (std::int64_t hh = lo; hh < hi; ++hh) {
            sa += g.assets[pre_step.asset_idx[hh]];
            ce += pre_step.occupation[hh] == Entrepreneur ? 1 : 0;
            cw += post_step.prize_idx[hh] > 0 ? 1 : 0;
        }
        sum_a[b] = sa;
        cnt_e[b] = ce;
        cnt_w[b] = cw;
    });
    PeriodStats ps;
    ps.period = period;
    double sa = 0.0;
    std::int64_t ce = 0, cw = 0;
    for (std::int64_t b = 0; b < nblocks; ++b) {
        sa += sum_a[b];
        ce += cnt_e[b];
        cw += cnt_w[b];
    }
    ps.mean_assets = sa / static_cast<double>(n);
    ps.entrepreneur_fraction = static_cast<double>(ce) / static_cast<double>(n);
    ps.winners = cw;
    return ps;
}

// Simulates the panel forward to period T, retaining full records for the
// last two periods and per-period aggregates throughout.
inline Panel run_simulation(const SimConfig& sim, const Equilibrium& eq) {
    sim.validate();
    Panel panel;
    panel.sim = sim;
    PanelState st = init_panel(sim, eq);
    panel.endowment = eq.grid.assets[st.asset_idx.empty() ? 0 : st.asset_idx[0]];
    PanelRng rng(sim.rng_seed);
    auto cdfs = detail::build_cdfs(eq.config, eq.grid);
    panel.series.push_back(period_stats(st, st, eq.grid, 1));
    panel.series.back().winners = 0;  // no prize draw in period 1

    int first_recorded = std::max(2, sim.n_periods - 1);
    panel.blocks.reserve(sim.n_periods - first_recorded + 1);
    std::vector<std::uint32_t> pre_assets;
    std::vector<std::uint8_t> pre_occ;
    for (int t = 2; t <= sim.n_periods; ++t) {
        PanelBlock* rec = nullptr;
        if (t >= first_recorded) {
            panel.blocks.emplace_back();
            rec = &panel.blocks.back();
        }
        pre_assets = st.asset_idx;
        pre_occ = st.occupation;
        step_panel(st, t, eq, rng, cdfs, rec);
        PanelState pre;
        pre.asset_idx.swap(pre_assets);
        pre.occupation.swap(pre_occ);
        panel.series.push_back(period_stats(pre, st, eq.grid, t));
        pre_assets.swap(pre.asset_idx);
        pre_occ.swap(pre.occupation);
    }
    return panel;
}

// Panel CSV: one row per household and retained period. `eta` and `theta`
// are grid values; `occupation` is 0 for workers, 1 for entrepreneurs;
// `k` is 0 for workers.
inline void write_panel_csv(const Panel& panel, const StateGrid& g, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw ValidationError("panel: cannot open for writing: " + path);
    std::fputs("id,t,a_lag,eta,theta,psi,occupation,c,a_next,k\n", f);
    for (const auto& b : panel.blocks) {
        const std::int64_t n = static_cast<std::int64_t>(b.a_lag.size());
        for (std::int64_t hh = 0; hh < n; ++hh) {
            std::fprintf(f, "%lld,%d,%.17g,%.17g,%.17g,%.17g,%d,%.17g,%.17g,%.17g\n",
                         static_cast<long long>(hh), b.period, b.a_lag[hh],
                         g.eta_values[b.eta_idx[hh]], g.theta_values[b.theta_idx[hh]], b.psi[hh],
                         static_cast<int>(b.occupation[hh]), b.consumption[hh], b.savings[hh],
                         b.capital[hh]);
        }
    }
    if (std::fclose(f) != 0) throw ValidationError("panel: close failed: " + path);
}

inline void write_panel_series_csv(const Panel& panel, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw ValidationError("panel series: cannot open for writing: " + path);
    std::fputs("t,mean_assets,entrepreneur_fraction,winners\n", f);
    for (const auto& s : panel.series)
        std::fprintf(f, "%d,%.17g,%.17g,%lld\n", s.period, s.mean_assets, s.entrepreneur_fraction,
                     static_cast<long long>(s.winners));
    if (std::fclose(f) != 0) throw ValidationError("panel series: close failed: " + path);
}

} // namespace lotecon
