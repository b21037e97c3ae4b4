#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "lotecon/checkpoint.hpp"
#include "lotecon/hash.hpp"

using namespace lotecon;
using Catch::Approx;

namespace {
std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}
} // namespace

TEST_CASE("checkpoint roundtrip preserves the equilibrium bit for bit") {
    namespace fs = std::filesystem;
    ModelConfig cfg = default_lottery_config();
    cfg.assets.count = 40;
    cfg.firm.k_count = 50;
    cfg.firm.n_count = 50;
    cfg.numerics.kl_tol = 2e-2;
    Equilibrium eq = solve_lottery(cfg);

    fs::path dir = fs::temp_directory_path() / "lotecon_ckpt_test";
    fs::create_directories(dir);
    std::string p1 = (dir / "a.bin").string();
    std::string p2 = (dir / "b.bin").string();
    std::uint64_t hash = fnv1a64(cfg.canonical_text());
    checkpoint::save(eq, p1, hash);

    checkpoint::Loaded L = checkpoint::load(p1);
    CHECK(L.source_config_hash == hash);
    CHECK(L.eq.prices.r == eq.prices.r);
    CHECK(L.eq.prices.w == eq.prices.w);
    CHECK(L.eq.k_over_l == eq.k_over_l);
    CHECK(L.eq.tau == eq.tau);
    CHECK(L.eq.values.worker == eq.values.worker);
    CHECK(L.eq.values.entre == eq.values.entre);
    for (int occ = 0; occ < 2; ++occ) {
        CHECK(L.eq.policies.savings_index[occ] == eq.policies.savings_index[occ]);
        CHECK(L.eq.policies.consumption[occ] == eq.policies.consumption[occ]);
        CHECK(L.eq.policies.next_worker[occ] == eq.policies.next_worker[occ]);
    }
    CHECK(L.eq.policies.firm_capital == eq.policies.firm_capital);
    CHECK(L.eq.phi.mass == eq.phi.mass);
    // recomputed aggregates and moments agree
    CHECK(L.eq.aggregates.total_output == Approx(eq.aggregates.total_output).epsilon(1e-14));
    CHECK(L.eq.moments.entrepreneur_fraction ==
          Approx(eq.moments.entrepreneur_fraction).epsilon(1e-14));

    checkpoint::save(L.eq, p2, L.source_config_hash);
    CHECK(slurp(p1) == slurp(p2));

    SECTION("corrupt files are rejected") {
        std::string text = slurp(p1);
        std::ofstream bad((dir / "bad.bin").string(), std::ios::binary);
        bad.write(text.data(), static_cast<std::streamsize>(text.size() / 2));
        bad.close();
        CHECK_THROWS_AS(checkpoint::load((dir / "bad.bin").string()), ValidationError);

        std::ofstream junk((dir / "junk.bin").string(), std::ios::binary);
        junk << "not a checkpoint";
        junk.close();
        CHECK_THROWS_AS(checkpoint::load((dir / "junk.bin").string()), ValidationError);
        CHECK_THROWS_AS(checkpoint::load((dir / "missing.bin").string()), ValidationError);
    }
    fs::remove_all(dir);
}
