#include <catch2/catch_amalgamated.hpp>

#include "lotecon/config_io.hpp"
#include "lotecon/hash.hpp"
#include "lotecon/ini.hpp"

using namespace lotecon;
using Catch::Approx;

TEST_CASE("ini parsing basics") {
    auto doc = IniDoc::parse("# comment\n[a]\nx = 1.5  # trailing\nv = 1 2 3\n[b]\nname = log\n");
    CHECK(doc.get_double("a", "x") == Approx(1.5));
    CHECK(doc.get_vector("a", "v") == std::vector<double>{1.0, 2.0, 3.0});
    CHECK(doc.get_string("b", "name", "") == "log");
    CHECK(doc.get_double("a", "missing", 9.0) == 9.0);
    CHECK_THROWS_WITH(doc.get_double("a", "missing"),
                      Catch::Matchers::ContainsSubstring("a.missing"));
    CHECK_THROWS_AS(IniDoc::parse("[open\n"), ValidationError);
    CHECK_THROWS_AS(IniDoc::parse("keyvalue\n"), ValidationError);
    CHECK_THROWS_AS(IniDoc::parse("[a]\nx = abc\n").get_double("a", "x"), ValidationError);
}

TEST_CASE("shipped presets load and validate") {
    ModelConfig bench = load_config_file(CONFIG_DIR "/benchmark.ini");
    CHECK_FALSE(bench.has_lottery());
    CHECK(bench.preferences.beta == Approx(0.9575));
    CHECK(bench.tax.a1 == Approx(0.768));
    CHECK(bench.assets.count == 1000);
    CHECK(bench.eta_chain.grid.size() == 5);
    // the normalized middle row sums to one exactly
    double s = 0.0;
    for (double p : bench.eta_chain.P[2]) s += p;
    CHECK(s == Approx(1.0).margin(1e-13));

    ModelConfig lot = load_config_file(CONFIG_DIR "/lottery.ini");
    REQUIRE(lot.has_lottery());
    CHECK(lot.lottery->tau == Approx(0.0292));
    CHECK(lot.lottery->prizes == std::vector<double>{0.0, 5.08, 15.24, 30.48});
    REQUIRE(lot.lottery->revenue_share_target.has_value());
    CHECK(*lot.lottery->revenue_share_target == Approx(0.0132));

    ModelConfig small = load_config_file(CONFIG_DIR "/small_prize.ini");
    REQUIRE(small.has_lottery());
    CHECK_FALSE(small.lottery->revenue_share_target.has_value());
    CHECK(small.lottery->expected_payout() == Approx(0.0292).epsilon(1e-12));

    ModelConfig large = load_config_file(CONFIG_DIR "/large_prize.ini");
    REQUIRE(large.has_lottery());
    CHECK(large.lottery->prizes == std::vector<double>{0.0, 58.4});
    CHECK(large.lottery->expected_payout() == Approx(0.0292).epsilon(1e-12));
}

TEST_CASE("canonical text roundtrips through the loader") {
    ModelConfig cfg = default_lottery_config();
    cfg.lottery->rebalance_to(0.0301);
    std::string text = cfg.canonical_text();
    ModelConfig back = load_config_text(text);
    CHECK(back.canonical_text() == text);
    CHECK(fnv1a64(back.canonical_text()) == fnv1a64(text));
}

TEST_CASE("config hash is stable and content-sensitive") {
    ModelConfig a = default_benchmark_config();
    ModelConfig b = default_benchmark_config();
    CHECK(fnv1a64(a.canonical_text()) == fnv1a64(b.canonical_text()));
    b.preferences.beta = 0.9576;
    CHECK(fnv1a64(a.canonical_text()) != fnv1a64(b.canonical_text()));
    CHECK(content_hash("abc") == content_hash("abc"));
    CHECK(content_hash("abc") != content_hash("abd"));
    CHECK(content_hash("").size() == 16);
}

TEST_CASE("malformed configs name the offending field") {
    std::string text = default_benchmark_config().canonical_text();
    // drop the beta line entirely
    auto pos = text.find("beta");
    std::string broken = text.substr(0, pos) + text.substr(text.find('\n', pos) + 1);
    CHECK_THROWS_WITH(load_config_text(broken),
                      Catch::Matchers::ContainsSubstring("preferences.beta"));
}

TEST_CASE("unbalanced prize structures are rejected at load") {
    ModelConfig cfg = default_lottery_config();
    cfg.lottery->prizes = {0.0, 50.8, 152.4, 304.8};  // ten-fold prizes, same ticket
    std::string text = cfg.canonical_text();
    CHECK_THROWS_WITH(load_config_text(text), Catch::Matchers::ContainsSubstring("balance"));
}

TEST_CASE("inconsistent non-winning probability is rejected") {
    ModelConfig cfg = default_lottery_config();
    std::string text = cfg.canonical_text();
    auto pos = text.find("probs =");
    std::string broken = text.substr(0, pos) + "probs = 0.9 0.0047 0.00025 0.00005\n" +
                         text.substr(text.find('\n', pos) + 1);
    CHECK_THROWS_WITH(load_config_text(broken),
                      Catch::Matchers::ContainsSubstring("inconsistent"));
}
