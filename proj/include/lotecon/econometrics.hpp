#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/QR>

#include "lotecon/errors.hpp"
#include "lotecon/simulate.hpp"

namespace lotecon {

struct RegressionSpec {
    std::string dependent;
    std::vector<std::string> regressors;
    bool include_intercept = false;
    std::string sample_filter;  // informational, e.g. "entrepreneurs only"
};

struct RegressionResult {
    RegressionSpec spec;
    std::vector<double> coef, se, tstat, pvalue;
    std::int64_t n = 0;
    double r_squared = 0.0;
    double rss = 0.0;

    std::string stars(std::size_t j) const {
        double p = pvalue[j];
        if (p < 0.001) return "***";
        if (p < 0.01) return "**";
        if (p < 0.05) return "*";
        return "";
    }
};

namespace detail {
inline double normal_two_sided_p(double t) { return std::erfc(std::fabs(t) / std::sqrt(2.0)); }
}

// Least squares via column-pivoted QR, classical standard errors
// sigma^2 (X'X)^-1 with sigma^2 = RSS/(N-K). Without an intercept the R^2
// is computed about zero.
inline RegressionResult ols(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                            const RegressionSpec& spec) {
    const std::int64_t n = y.size();
    Eigen::MatrixXd design = X;
    std::vector<std::string> names = spec.regressors;
    if (spec.include_intercept) {
        design.conservativeResize(Eigen::NoChange, X.cols() + 1);
        design.col(X.cols()).setOnes();
        names.push_back("intercept");
    }
    const auto k = design.cols();
    if (n <= k)
        throw ValidationError("ols: need more observations than regressors (N=" +
                              std::to_string(n) + ", K=" + std::to_string(k) + ")");
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    qr.setThreshold(1e-10);
    if (qr.rank() < k) {
        // name the columns that got pivoted out
        std::string offenders;
        const auto& perm = qr.colsPermutation().indices();
        for (Eigen::Index j = qr.rank(); j < k; ++j) {
            if (!offenders.empty()) offenders += ", ";
            offenders += names[static_cast<std::size_t>(perm[j])];
        }
        throw ValidationError("ols: design matrix is rank deficient; offending columns: " + offenders);
    }
    Eigen::VectorXd beta = qr.solve(y);
    Eigen::VectorXd resid = y - design * beta;
    double rss = resid.squaredNorm();
    double sigma2 = rss / static_cast<double>(n - k);
    // (X'X)^-1 = P R^-1 R^-T P' from the pivoted factorization
    Eigen::MatrixXd R = qr.matrixR().topLeftCorner(k, k).template triangularView<Eigen::Upper>();
    Eigen::MatrixXd Rinv = R.inverse();
    Eigen::MatrixXd xtx_inv_permuted = Rinv * Rinv.transpose();
    Eigen::MatrixXd P = qr.colsPermutation();
    Eigen::MatrixXd xtx_inv = P * xtx_inv_permuted * P.transpose();

    RegressionResult res;
    res.spec = spec;
    res.spec.regressors = names;
    res.n = n;
    res.rss = rss;
    double tss;
    if (spec.include_intercept) {
        double mean = y.mean();
        tss = (y.array() - mean).square().sum();
    } else {
        tss = y.squaredNorm();
    }
    res.r_squared = tss > 0.0 ? 1.0 - rss / tss : 0.0;
    for (Eigen::Index j = 0; j < k; ++j) {
        double b = beta[j];
        double s = std::sqrt(sigma2 * xtx_inv(j, j));
        double t = s > 0.0 ? b / s : 0.0;
        res.coef.push_back(b);
        res.se.push_back(s);
        res.tstat.push_back(t);
        res.pvalue.push_back(s > 0.0 ? detail::normal_two_sided_p(t) : 0.0);
    }
    return res;
}

// Last-period regression sample: one observation per household with the
// prize, lagged wealth, and outcomes.
struct PanelRegressionData {
    std::vector<double> prize, lagged_wealth, consumption, investment;
    std::vector<std::uint8_t> entrepreneur;

    std::int64_t size() const { return static_cast<std::int64_t>(prize.size()); }
};

inline PanelRegressionData regression_data_from_panel(const Panel& panel) {
    if (panel.blocks.empty()) throw ValidationError("panel has no recorded periods");
    const PanelBlock& last = panel.blocks.back();
    PanelRegressionData d;
    const std::int64_t n = static_cast<std::int64_t>(last.a_lag.size());
    d.prize.reserve(n);
    for (std::int64_t i = 0; i < n; ++i) {
        d.prize.push_back(last.psi[i]);
        d.lagged_wealth.push_back(last.a_lag[i]);
        d.consumption.push_back(last.consumption[i]);
        d.investment.push_back(last.capital[i]);
        d.entrepreneur.push_back(last.occupation[i]);
    }
    return d;
}

// Reads a panel CSV produced by write_panel_csv and keeps the final period.
inline PanelRegressionData regression_data_from_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("regress: cannot open panel: " + path);
    std::string header;
    if (!std::getline(in, header)) throw ValidationError("regress: empty panel file: " + path);
    std::vector<std::string> cols;
    {
        std::istringstream hs(header);
        std::string c;
        while (std::getline(hs, c, ',')) cols.push_back(c);
    }
    auto col_of = [&](const std::string& name) {
        for (std::size_t i = 0; i < cols.size(); ++i)
            if (cols[i] == name) return static_cast<int>(i);
        throw ValidationError("regress: panel is missing column '" + name + "'");
    };
    int ct = col_of("t"), ca = col_of("a_lag"), cp = col_of("psi"), co = col_of("occupation");
    int cc = col_of("c"), ck = col_of("k");
    struct Row {
        int t;
        double a_lag, psi, c, k;
        std::uint8_t occ;
    };
    std::vector<Row> rows;
    std::string line;
    std::vector<std::string> f;
    int max_t = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        f.clear();
        std::istringstream ls(line);
        std::string tok;
        while (std::getline(ls, tok, ',')) f.push_back(tok);
        if (static_cast<int>(f.size()) < static_cast<int>(cols.size()))
            throw ValidationError("regress: malformed panel row: " + line);
        Row r;
        r.t = std::atoi(f[ct].c_str());
        r.a_lag = std::atof(f[ca].c_str());
        r.psi = std::atof(f[cp].c_str());
        r.c = std::atof(f[cc].c_str());
        r.k = std::atof(f[ck].c_str());
        r.occ = static_cast<std::uint8_t>(std::atoi(f[co].c_str()));
        rows.push_back(r);
        max_t = std::max(max_t, r.t);
    }
    if (rows.empty()) throw ValidationError("regress: panel has no data rows");
    PanelRegressionData d;
    for (const Row& r : rows) {
        if (r.t != max_t) continue;
        d.prize.push_back(r.psi);
        d.lagged_wealth.push_back(r.a_lag);
        d.consumption.push_back(r.c);
        d.investment.push_back(r.k);
        d.entrepreneur.push_back(r.occ);
    }
    return d;
}

// The three panel regressions: entrepreneur status, consumption, and
// (entrepreneurs only) investment, each on the prize and lagged wealth.
// Ability is deliberately not a regressor. An intercept is included by
// default: without one, the positive-mean prize column absorbs whatever
// level of the outcome lagged wealth cannot match, which manufactures a
// spurious prize effect in the binary entry equation.
inline std::array<RegressionResult, 3> run_panel_regressions(const PanelRegressionData& d,
                                                             bool include_intercept = true) {
    const std::int64_t n = d.size();
    if (n == 0) throw ValidationError("regress: empty sample");
    Eigen::MatrixXd X(n, 2);
    Eigen::VectorXd y_ent(n), y_con(n);
    std::int64_t n_ent = 0;
    for (std::int64_t i = 0; i < n; ++i) {
        X(i, 0) = d.prize[i];
        X(i, 1) = d.lagged_wealth[i];
        y_ent[i] = d.entrepreneur[i] ? 1.0 : 0.0;
        y_con[i] = d.consumption[i];
        n_ent += d.entrepreneur[i] ? 1 : 0;
    }
    RegressionSpec s1{"Entrepreneur", {"prize", "wealth"}, include_intercept, "full sample"};
    RegressionSpec s2{"Consumption", {"prize", "wealth"}, include_intercept, "full sample"};
    RegressionSpec s3{"Investment", {"prize", "wealth"}, include_intercept, "entrepreneurs only"};
    Eigen::MatrixXd Xe(n_ent, 2);
    Eigen::VectorXd y_inv(n_ent);
    std::int64_t j = 0;
    for (std::int64_t i = 0; i < n; ++i) {
        if (!d.entrepreneur[i]) continue;
        Xe(j, 0) = d.prize[i];
        Xe(j, 1) = d.lagged_wealth[i];
        y_inv[j] = d.investment[i];
        ++j;
    }
    return {ols(y_ent, X, s1), ols(y_con, X, s2), ols(y_inv, Xe, s3)};
}

// Star-annotated table, coefficients over standard errors in parentheses.
inline std::string regression_table_text(const std::array<RegressionResult, 3>& results) {
    char buf[128];
    auto fmt = [&](const char* f, auto... args) {
        std::snprintf(buf, sizeof(buf), f, args...);
        return std::string(buf);
    };
    std::string out;
    out += fmt("%-14s", "");
    for (const auto& r : results) out += fmt("%16s", r.spec.dependent.c_str());
    out += "\n";
    const std::vector<std::pair<std::string, int>> rows = {{"prize, psi", 0}, {"wealth, a", 1}};
    for (const auto& [label, j] : rows) {
        out += fmt("%-14s", label.c_str());
        for (const auto& r : results) {
            std::string cell = fmt("%.3f", r.coef[j]) + r.stars(j);
            out += fmt("%16s", cell.c_str());
        }
        out += "\n";
        out += fmt("%-14s", "");
        for (const auto& r : results) {
            std::string cell = "(" + fmt("%.3f", r.se[j]) + ")";
            out += fmt("%16s", cell.c_str());
        }
        out += "\n";
    }
    out += fmt("%-14s", "N");
    for (const auto& r : results) out += fmt("%16lld", static_cast<long long>(r.n));
    out += "\n";
    out += fmt("%-14s", "R2");
    for (const auto& r : results) out += fmt("%16.3f", r.r_squared);
    out += "\n";
    out += "* p<0.05, ** p<0.01, *** p<0.001\n";
    return out;
}

inline void write_regression_csv(const std::array<RegressionResult, 3>& results,
                                 const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw ValidationError("regress: cannot open for writing: " + path);
    std::fputs("regression,regressor,coef,se,tstat,pvalue,stars,n,r2\n", f);
    for (const auto& r : results)
        for (std::size_t j = 0; j < r.coef.size(); ++j)
            std::fprintf(f, "%s,%s,%.17g,%.17g,%.17g,%.17g,%s,%lld,%.17g\n",
                         r.spec.dependent.c_str(), r.spec.regressors[j].c_str(), r.coef[j], r.se[j],
                         r.tstat[j], r.pvalue[j], r.stars(j).c_str(), static_cast<long long>(r.n),
                         r.r_squared);
    if (std::fclose(f) != 0) throw ValidationError("regress: close failed: " + path);
}

} // namespace lotecon
