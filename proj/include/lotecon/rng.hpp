#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace lotecon {

// Philox4x64-10 counter-based generator. Every draw is a pure function of
// (key, counter), so panel simulations can key streams by
// (seed, household, period, variable) and stay reproducible under any
// scheduling of the work.
struct Philox4x64 {
    using Counter = std::array<std::uint64_t, 4>;
    using Key = std::array<std::uint64_t, 2>;

    static constexpr std::uint64_t M0 = 0xD2E7470EE14C6C93ull;
    static constexpr std::uint64_t M1 = 0xCA5A826395121157ull;
    static constexpr std::uint64_t W0 = 0x9E3779B97F4A7C15ull;
    static constexpr std::uint64_t W1 = 0xBB67AE8584CAA73Bull;

    static Counter block(Key key, Counter ctr) {
        for (int round = 0; round < 10; ++round) {
            __uint128_t p0 = static_cast<__uint128_t>(M0) * ctr[0];
            __uint128_t p1 = static_cast<__uint128_t>(M1) * ctr[2];
            std::uint64_t hi0 = static_cast<std::uint64_t>(p0 >> 64), lo0 = static_cast<std::uint64_t>(p0);
            std::uint64_t hi1 = static_cast<std::uint64_t>(p1 >> 64), lo1 = static_cast<std::uint64_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
            key[0] += W0;
            key[1] += W1;
        }
        return ctr;
    }
};

// Per-(household, period, variable) uniform draws for the panel simulator.
class PanelRng {
public:
    enum Variable : std::uint64_t { VarEta = 0, VarTheta = 1, VarPsi = 2 };

    explicit PanelRng(std::uint64_t seed) : key_{seed, 0} {}

    // Uniform on [0,1) with 53 random bits.
    double uniform(std::uint64_t household, std::uint64_t period, Variable var) const {
        auto blk = Philox4x64::block(key_, {household, period, static_cast<std::uint64_t>(var), 0});
        return static_cast<double>(blk[0] >> 11) * 0x1.0p-53;
    }

    // Inverse-CDF draw: smallest j with u < cdf[j]; cdf.back() must be 1.
    static int categorical(double u, const std::vector<double>& cdf) {
        int n = static_cast<int>(cdf.size());
        for (int j = 0; j < n - 1; ++j)
            if (u < cdf[j]) return j;
        return n - 1;
    }

    static std::vector<double> cumulative(const std::vector<double>& probs) {
        std::vector<double> cdf(probs.size());
        double acc = 0.0;
        for (std::size_t j = 0; j < probs.size(); ++j) {
            acc += probs[j];
            cdf[j] = acc;
        }
        cdf.back() = 1.0;
        return cdf;
    }

private:
    Philox4x64::Key key_;
};

} // namespace lotecon
