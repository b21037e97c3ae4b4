#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "lotecon/config_io.hpp"
#include "lotecon/equilibrium.hpp"
#include "lotecon/hash.hpp"

namespace lotecon {

// Versioned binary checkpoint: the resolved config travels inside, so a
// checkpoint alone is enough to rebuild grids, simulate, or re-report.
// Layout is fixed-order little-endian; identical solves produce identical
// bytes.
namespace checkpoint {

constexpr char MAGIC[4] = {'L', 'Q', 'E', 'C'};
constexpr std::uint32_t VERSION = 1;

namespace detail {

template <class T>
void write_pod(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T read_pod(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw ValidationError("checkpoint: truncated file");
    return v;
}

template <class T>
void write_array(std::ostream& out, const std::vector<T>& v) {
    write_pod<std::uint64_t>(out, v.size());
    out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(T)));
}

template <class T>
std::vector<T> read_array(std::istream& in) {
    auto n = read_pod<std::uint64_t>(in);
    std::vector<T> v(n);
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(T)));
    if (!in) throw ValidationError("checkpoint: truncated array");
    return v;
}

inline void write_string(std::ostream& out, const std::string& s) {
    write_pod<std::uint64_t>(out, s.size());
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string read_string(std::istream& in) {
    auto n = read_pod<std::uint64_t>(in);
    std::string s(n, '\0');
    in.read(s.data(), static_cast<std::streamsize>(n));
    if (!in) throw ValidationError("checkpoint: truncated string");
    return s;
}

} // namespace detail

struct Loaded {
    Equilibrium eq;
    std::uint64_t source_config_hash = 0;
    std::string resolved_config_text;
};

inline void save(const Equilibrium& eq, const std::string& path, std::uint64_t source_config_hash) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("checkpoint: cannot open for writing: " + path);
    using namespace detail;
    out.write(MAGIC, 4);
    write_pod<std::uint32_t>(out, VERSION);
    write_pod<std::uint64_t>(out, source_config_hash);
    write_string(out, eq.config.canonical_text());
    write_pod<std::uint8_t>(out, eq.config.has_lottery() ? 1 : 0);
    write_pod<double>(out, eq.prices.r);
    write_pod<double>(out, eq.prices.w);
    write_pod<double>(out, eq.k_over_l);
    write_pod<double>(out, eq.tau);
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(eq.grid.n_theta));
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(eq.grid.n_eta));
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(eq.grid.n_prizes));
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(eq.grid.n_assets));
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(eq.grid.k_grid.size()));
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(eq.grid.n_grid.size()));
    write_array(out, eq.values.worker);
    write_array(out, eq.values.entre);
    for (int occ = 0; occ < 2; ++occ) {
        write_array(out, eq.policies.savings_index[occ]);
        write_array(out, eq.policies.consumption[occ]);
        write_array(out, eq.policies.next_worker[occ]);
        write_array(out, eq.policies.floored[occ]);
    }
    write_array(out, eq.policies.firm_capital);
    write_array(out, eq.policies.firm_labor);
    write_array(out, eq.policies.profit_after_tax);
    write_array(out, eq.policies.profit_pretax);
    write_array(out, eq.phi.mass);
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(eq.outer_iterations));
    write_pod<double>(out, eq.top_asset_mass);
    if (!out) throw ValidationError("checkpoint: write failed: " + path);
}

inline Loaded load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("checkpoint: cannot open: " + path);
    using namespace detail;
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, MAGIC, 4) != 0)
        throw ValidationError("checkpoint: bad magic in " + path);
    auto version = read_pod<std::uint32_t>(in);
    if (version != VERSION)
        throw ValidationError("checkpoint: unsupported version " + std::to_string(version));
    Loaded L;
    L.source_config_hash = read_pod<std::uint64_t>(in);
    L.resolved_config_text = read_string(in);
    Equilibrium& eq = L.eq;
    eq.config = load_config_text(L.resolved_config_text, path + " (embedded config)");
    std::uint8_t economy = read_pod<std::uint8_t>(in);
    if ((economy == 1) != eq.config.has_lottery())
        throw ValidationError("checkpoint: economy tag disagrees with embedded config");
    eq.prices.r = read_pod<double>(in);
    eq.prices.w = read_pod<double>(in);
    eq.k_over_l = read_pod<double>(in);
    eq.tau = read_pod<double>(in);
    eq.grid = StateGrid::build(eq.config);
    std::uint32_t nt = read_pod<std::uint32_t>(in), ne = read_pod<std::uint32_t>(in);
    std::uint32_t np = read_pod<std::uint32_t>(in), na = read_pod<std::uint32_t>(in);
    std::uint32_t nk = read_pod<std::uint32_t>(in), nn = read_pod<std::uint32_t>(in);
    if (static_cast<int>(nt) != eq.grid.n_theta || static_cast<int>(ne) != eq.grid.n_eta ||
        static_cast<int>(np) != eq.grid.n_prizes || static_cast<int>(na) != eq.grid.n_assets ||
        nk != eq.grid.k_grid.size() || nn != eq.grid.n_grid.size())
        throw ValidationError("checkpoint: stored dimensions disagree with embedded config");
    eq.values.worker = read_array<double>(in);
    eq.values.entre = read_array<double>(in);
    for (int occ = 0; occ < 2; ++occ) {
        eq.policies.savings_index[occ] = read_array<std::uint32_t>(in);
        eq.policies.consumption[occ] = read_array<double>(in);
        eq.policies.next_worker[occ] = read_array<std::uint8_t>(in);
        eq.policies.floored[occ] = read_array<std::uint8_t>(in);
    }
    eq.policies.firm_capital = read_array<double>(in);
    eq.policies.firm_labor = read_array<double>(in);
    eq.policies.profit_after_tax = read_array<double>(in);
    eq.policies.profit_pretax = read_array<double>(in);
    eq.phi.mass = read_array<double>(in);
    eq.phi.n_states = eq.grid.n_states();
    if (eq.phi.mass.size() != static_cast<std::size_t>(2 * eq.grid.n_states()) ||
        eq.values.worker.size() != static_cast<std::size_t>(eq.grid.n_states()))
        throw ValidationError("checkpoint: array sizes disagree with grid");
    eq.outer_iterations = static_cast<int>(read_pod<std::uint32_t>(in));
    eq.top_asset_mass = read_pod<double>(in);
    eq.aggregates = compute_aggregates(eq.phi, eq.policies, eq.grid, eq.prices, eq.config);
    eq.moments = compute_moments(eq.phi, eq.policies, eq.grid, eq.config, eq.aggregates);
    eq.moments.top_asset_mass = eq.top_asset_mass;
    return L;
}

} // namespace checkpoint
} // namespace lotecon
