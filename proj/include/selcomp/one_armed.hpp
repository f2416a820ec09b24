#pragma once
// Exact solver for the one-armed Bernoulli selection problem: one arm of
// known value lambda, one Beta-Bernoulli arm with counts (s, f), and a cost c
// per sample of the uncertain arm.
//
// The myopic policy stops in every state with c >= lambda(1-lambda)/(n+3),
// and that set is closed under transitions, so the optimal policy never
// samples beyond n_max = ceil(lambda(1-lambda)/c - 3). Backward induction
// starts from that boundary.
//
// Storage keeps, for each row n = s + f, only the hull of states where
// sampling is optimal; every other state has value max(lambda, mean).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "selcomp/bernoulli.hpp"
#include "selcomp/core.hpp"

namespace selcomp {

/// Largest number of uncertain-arm samples any optimal one-armed policy takes.
inline std::uint64_t one_armed_sample_bound(double lambda, double cost) {
    if (!(cost > 0.0)) throw std::invalid_argument("one_armed_sample_bound: cost must be positive");
    const double x = lambda * (1.0 - lambda) / cost - 3.0;
    // Slack absorbs rounding in lambda(1-lambda)/c when it lands on an integer.
    const double n = std::ceil(x - 1e-9);
    return n > 0.0 ? static_cast<std::uint64_t>(n) : 0;
}

enum class OneArmedAction : unsigned char { Stop = 0, Sample = 1 };

class OneArmedTable {
public:
    double lambda() const { return lambda_; }
    double cost() const { return cost_; }
    // Depth of the boundary row (n_max for tables from solve_one_armed).
    std::uint64_t n_max() const { return depth_; }

    double stop_value(std::uint64_t s, std::uint64_t f) const {
        return std::max(lambda_, posterior_mean({s, f}));
    }

    double value(std::uint64_t s, std::uint64_t f) const {
        const std::uint64_t n = s + f;
        if (n >= depth_) return stop_value(s, f);
        const Row& row = rows_[n];
        if (s >= row.lo && s < row.lo + row.values.size()) return row.values[s - row.lo];
        return stop_value(s, f);
    }

    OneArmedAction act(std::uint64_t s, std::uint64_t f) const {
        const std::uint64_t n = s + f;
        if (n >= depth_) return OneArmedAction::Stop;
        const Row& row = rows_[n];
        if (s >= row.lo && s < row.lo + row.sample.size() && row.sample[s - row.lo])
            return OneArmedAction::Sample;
        return OneArmedAction::Stop;
    }

    /// Q-value of sampling the uncertain arm once and continuing optimally.
    /// Past the boundary every successor stops, so this is the one-step value.
    double q_sample(std::uint64_t s, std::uint64_t f) const {
        const double p = predictive_success({s, f});
        const std::uint64_t n = s + f;
        if (n >= depth_) return p * stop_value(s + 1, f) + (1.0 - p) * stop_value(s, f + 1) - cost_;
        return p * value(s + 1, f) + (1.0 - p) * value(s, f + 1) - cost_;
    }

    // Number of explicitly stored entries (sampling hull), for diagnostics.
    std::size_t stored_entries() const {
        std::size_t total = 0;
        for (const auto& r : rows_) total += r.values.size();
        return total;
    }

    friend OneArmedTable solve_one_armed_to_depth(double lambda, double cost, std::uint64_t depth);
    friend OneArmedTable read_one_armed_table(std::istream& in);

private:
    struct Row {
        std::uint64_t lo = 0;
        std::vector<double> values;
        std::vector<unsigned char> sample;
    };

    double lambda_ = 0.0;
    double cost_ = 0.0;
    std::uint64_t depth_ = 0;
    std::vector<Row> rows_;  // rows_[n] for n < depth_
};

/// Backward induction with sampling forbidden from row `depth` onwards.
/// With depth = n_max this is the exact optimum; deeper depths exist to
/// check the boundary independently.
inline OneArmedTable solve_one_armed_to_depth(double lambda, double cost, std::uint64_t depth) {
    if (!(cost > 0.0) || !std::isfinite(cost))
        throw std::invalid_argument("solve_one_armed: cost must be positive");
    if (!(lambda >= 0.0 && lambda <= 1.0))
        throw std::invalid_argument("solve_one_armed: lambda must lie in [0, 1]");
    OneArmedTable t;
    t.lambda_ = lambda;
    t.cost_ = cost;
    t.depth_ = depth;
    t.rows_.resize(depth);

    // Hull of sampling states in the row below, as [lo, hi); empty when lo == hi.
    std::int64_t below_lo = 0, below_hi = 0;
    std::vector<double> values;
    std::vector<unsigned char> sample;
    for (std::int64_t n = static_cast<std::int64_t>(depth) - 1; n >= 0; --n) {
        // A state can only prefer sampling if a successor does, or if one
        // sample can flip the decision (mean after failure < lambda < mean
        // after success); elsewhere sampling is worth exactly -c.
        const double pivot = lambda * static_cast<double>(n + 3);
        std::int64_t lo = static_cast<std::int64_t>(std::floor(pivot)) - 2;
        std::int64_t hi = static_cast<std::int64_t>(std::ceil(pivot)) + 1;
        if (below_hi > below_lo) {
            lo = std::min(lo, below_lo - 1);
            hi = std::max(hi, below_hi);
        }
        lo = std::max<std::int64_t>(lo, 0);
        hi = std::min<std::int64_t>(hi, n + 1);

        values.clear();
        sample.clear();
        std::int64_t first = -1, last = -1;
        for (std::int64_t s = lo; s < hi; ++s) {
            const auto us = static_cast<std::uint64_t>(s);
            const auto uf = static_cast<std::uint64_t>(n - s);
            const double stop = t.stop_value(us, uf);
            const double q = t.q_sample(us, uf);
            const bool go = q > stop + kTieTolerance;
            values.push_back(go ? q : stop);
            sample.push_back(go ? 1 : 0);
            if (go) {
                if (first < 0) first = s;
                last = s;
            }
        }
        auto& row = t.rows_[static_cast<std::size_t>(n)];
        if (first >= 0) {
            row.lo = static_cast<std::uint64_t>(first);
            row.values.assign(values.begin() + (first - lo), values.begin() + (last - lo + 1));
            row.sample.assign(sample.begin() + (first - lo), sample.begin() + (last - lo + 1));
            below_lo = first;
            below_hi = last + 1;
        } else {
            below_lo = below_hi = 0;
        }
    }
    return t;
}

inline OneArmedTable solve_one_armed(double lambda, double cost) {
    return solve_one_armed_to_depth(lambda, cost, one_armed_sample_bound(lambda, cost));
}

// ---------------------------------------------------------------------------
// Text dump
//
//   # selcomp one-armed table v1
//   lambda,cost,n_max
//   <lambda>,<cost>,<n_max>
//   s,f,value,act
//   <one line per (s, f) with s + f <= n_max, ordered by n then s>
//
// act is 1 for Sample, 0 for Stop. Reals are written with 17 significant
// digits so a dump reloads bit-exactly.
// ---------------------------------------------------------------------------

inline constexpr const char* kOneArmedTableHeader = "# selcomp one-armed table v1";

inline std::string format_real(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline void write_one_armed_table(std::ostream& out, const OneArmedTable& t) {
    out << kOneArmedTableHeader << '\n'
        << "lambda,cost,n_max\n"
        << format_real(t.lambda()) << ',' << format_real(t.cost()) << ',' << t.n_max() << '\n'
        << "s,f,value,act\n";
    for (std::uint64_t n = 0; n <= t.n_max(); ++n)
        for (std::uint64_t s = 0; s <= n; ++s)
            out << s << ',' << (n - s) << ',' << format_real(t.value(s, n - s)) << ','
                << (t.act(s, n - s) == OneArmedAction::Sample ? 1 : 0) << '\n';
}

inline OneArmedTable read_one_armed_table(std::istream& in) {
    auto next_line = [&](const char* what) {
        std::string line;
        if (!std::getline(in, line)) throw std::runtime_error(std::string("one-armed table: missing ") + what);
        return line;
    };
    if (next_line("header") != kOneArmedTableHeader)
        throw std::runtime_error("one-armed table: unrecognised header");
    next_line("column names");
    OneArmedTable t;
    {
        std::istringstream meta(next_line("parameters"));
        char c1 = 0, c2 = 0;
        if (!(meta >> t.lambda_ >> c1 >> t.cost_ >> c2 >> t.depth_) || c1 != ',' || c2 != ',')
            throw std::runtime_error("one-armed table: malformed parameter line");
    }
    next_line("row column names");
    t.rows_.resize(t.depth_);
    for (std::uint64_t n = 0; n <= t.depth_; ++n) {
        std::vector<double> values(n + 1);
        std::vector<unsigned char> sample(n + 1);
        for (std::uint64_t s = 0; s <= n; ++s) {
            std::istringstream row(next_line("table row"));
            std::uint64_t rs = 0, rf = 0;
            int act = 0;
            char a = 0, b = 0, c = 0;
            if (!(row >> rs >> a >> rf >> b >> values[s] >> c >> act) || rs != s || rf != n - s)
                throw std::runtime_error("one-armed table: malformed or out-of-order row at n=" +
                                         std::to_string(n));
            sample[s] = act ? 1 : 0;
        }
        if (n == t.depth_) break;
        std::int64_t first = -1, last = -1;
        for (std::uint64_t s = 0; s <= n; ++s)
            if (sample[s]) {
                if (first < 0) first = static_cast<std::int64_t>(s);
                last = static_cast<std::int64_t>(s);
            }
        if (first >= 0) {
            auto& r = t.rows_[n];
            r.lo = static_cast<std::uint64_t>(first);
            r.values.assign(values.begin() + first, values.begin() + last + 1);
            r.sample.assign(sample.begin() + first, sample.begin() + last + 1);
        }
    }
    return t;
}

}  // namespace selcomp
