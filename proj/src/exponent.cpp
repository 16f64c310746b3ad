#include "explab/exponent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "explab/errors.hpp"

namespace explab {

namespace {

constexpr double kSimplexTolerance = 1e-9;
constexpr double kActiveTolerance = 1e-12;
constexpr int kBisectionLimit = 200;

void check_distribution(std::span<const double> p, std::size_t size, const char* what) {
    if (p.size() != size) {
        throw argument_error(std::string(what) + " has " + std::to_string(p.size()) +
                             " entries, alphabet has " + std::to_string(size));
    }
    double total = 0.0;
    for (double v : p) {
        if (!(v >= -kSimplexTolerance)) {
            throw argument_error(std::string(what) + " has a negative entry");
        }
        total += v;
    }
    if (std::abs(total - 1.0) > kSimplexTolerance) {
        throw argument_error(std::string(what) + " does not sum to 1");
    }
}

double dot_row(const ConstraintSet& cs, std::size_t i, std::span<const double> p) {
    double s = 0.0;
    for (std::size_t j = 0; j < cs.columns(); ++j) {
        s += cs.rows()[i][j] * p[j];
    }
    return s;
}

// Tilted distribution q_j exp(-lambda a_ij) / Z, evaluated in log space.
std::vector<double> tilt(std::span<const double> q, const ConstraintSet& cs, std::size_t row, double lambda) {
    std::vector<double> w(q.size());
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < q.size(); ++j) {
        w[j] = std::log(q[j]) - lambda * cs.coefficient(row, j);
        top = std::max(top, w[j]);
    }
    double z = 0.0;
    for (double& v : w) {
        v = std::exp(v - top);
        z += v;
    }
    for (double& v : w) {
        v /= z;
    }
    return w;
}

Projection project_row(std::span<const double> q, const ConstraintSet& cs, std::size_t row) {
    Projection out;
    out.active_row = row;
    bool has_negative = false;
    for (std::size_t j = 0; j < cs.columns(); ++j) {
        has_negative = has_negative || cs.rows()[row][j] < 0;
    }
    if (!has_negative) {
        // Only the limit lambda -> infinity reaches the half-space: all mass
        // moves to the symbols the row ignores.
        double free_mass = 0.0;
        out.p_star.assign(q.size(), 0.0);
        for (std::size_t j = 0; j < q.size(); ++j) {
            if (cs.coefficient(row, j) == 0) {
                free_mass += q[j];
                out.p_star[j] = q[j];
            }
        }
        if (free_mass <= 0.0) {
            out.d = std::numeric_limits<double>::infinity();
            return out;
        }
        for (double& v : out.p_star) {
            v /= free_mass;
        }
        out.d = -std::log(free_mass);
        out.lambda = std::numeric_limits<double>::infinity();
        return out;
    }
    auto gap = [&](double lambda) {
        auto p = tilt(q, cs, row, lambda);
        return dot_row(cs, row, p);
    };
    double lo = 0.0;
    double hi = 1.0;
    while (gap(hi) > 0.0) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e6) {
            throw numerical_error("tilting bracket did not close");
        }
    }
    double lambda = hi;
    bool converged = false;
    for (int it = 0; it < kBisectionLimit; ++it) {
        lambda = 0.5 * (lo + hi);
        double v = gap(lambda);
        if (std::abs(v) < kActiveTolerance) {
            converged = true;
            break;
        }
        (v > 0.0 ? lo : hi) = lambda;
    }
    if (!converged) {
        throw numerical_error("tilting bisection did not converge");
    }
    out.lambda = lambda;
    out.p_star = tilt(q, cs, row, lambda);
    out.d = kl_divergence(out.p_star, q);
    return out;
}

}  // namespace

ConstraintSet::ConstraintSet(std::vector<std::vector<int>> a_matrix, std::size_t alphabet_size)
    : rows_(std::move(a_matrix)), alphabet_size_(alphabet_size), columns_(0) {
    if (!rows_.empty()) {
        columns_ = rows_.front().size();
    }
    if (columns_ > alphabet_size_) {
        throw argument_error("constraint matrix has more columns than the alphabet has symbols");
    }
    for (const auto& row : rows_) {
        if (row.size() != columns_) {
            throw argument_error("constraint matrix rows differ in length");
        }
        if (std::all_of(row.begin(), row.end(), [](int v) { return v == 0; })) {
            throw argument_error("constraint matrix has an all-zero row");
        }
    }
}

ConstraintSet::ConstraintSet(const AlphabetModel& am) : ConstraintSet(am.a_matrix, am.symbols.size()) {}

bool ConstraintSet::contains_counts(std::span<const long long> counts) const {
    if (counts.size() != alphabet_size_) {
        throw argument_error("count vector does not match the alphabet size");
    }
    for (const auto& row : rows_) {
        long long s = 0;
        for (std::size_t j = 0; j < columns_; ++j) {
            s += row[j] * counts[j];
        }
        if (s <= 0) {
            return true;
        }
    }
    return false;
}

bool in_pi(std::span<const double> p, const ConstraintSet& cs) {
    check_distribution(p, cs.alphabet_size(), "distribution");
    for (std::size_t i = 0; i < cs.rows().size(); ++i) {
        if (dot_row(cs, i, p) <= kActiveTolerance) {
            return true;
        }
    }
    return false;
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) {
        throw argument_error("KL divergence of vectors with different lengths");
    }
    double d = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0.0) {
            continue;
        }
        if (q[i] <= 0.0) {
            return std::numeric_limits<double>::infinity();
        }
        d += p[i] * std::log(p[i] / q[i]);
    }
    return d;
}

Projection kl_projection(std::span<const double> q, const ConstraintSet& cs) {
    check_distribution(q, cs.alphabet_size(), "reference distribution");
    if (std::any_of(q.begin(), q.end(), [](double v) { return v <= 0.0; })) {
        throw argument_error("reference distribution must be strictly positive");
    }
    if (cs.rows().empty()) {
        throw argument_error("constraint set has no rows");
    }
    for (std::size_t i = 0; i < cs.rows().size(); ++i) {
        if (dot_row(cs, i, q) <= kActiveTolerance) {
            return Projection{0.0, std::vector<double>(q.begin(), q.end()), i, 0.0};
        }
    }
    Projection best;
    best.d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < cs.rows().size(); ++i) {
        auto candidate = project_row(q, cs, i);
        if (candidate.d < best.d) {
            best = std::move(candidate);
        }
    }
    return best;
}

double kl_projection_grid_oracle(std::span<const double> q, const ConstraintSet& cs, int resolution) {
    const std::size_t m = cs.alphabet_size();
    if (m > 4) {
        throw resource_error("grid oracle supports at most 4 symbols");
    }
    if (resolution < 1) {
        throw argument_error("grid resolution must be positive");
    }
    if (q.size() != m) {
        throw argument_error("reference distribution does not match the alphabet size");
    }
    double best = std::numeric_limits<double>::infinity();
    std::vector<long long> counts(m, 0);
    std::vector<double> p(m);
    // Enumerate compositions of resolution into m parts.
    counts[m - 1] = resolution;
    while (true) {
        if (cs.contains_counts(counts)) {
            for (std::size_t j = 0; j < m; ++j) {
                p[j] = static_cast<double>(counts[j]) / resolution;
            }
            best = std::min(best, kl_divergence(p, q));
        }
        // Next composition: move one unit from the last part into the
        // rightmost part that can still grow.
        std::size_t j = m - 1;
        while (j > 0 && counts[j] == 0) {
            --j;
        }
        if (j == 0) {
            break;
        }
        long long rest = counts[j] - 1;
        counts[j] = 0;
        ++counts[j - 1];
        counts[m - 1] = rest;
    }
    return best;
}

double vc_agnostic_exponent(double delta) {
    if (!(delta > 0.0 && delta < 1.0)) {
        throw argument_error("delta must lie in (0, 1)");
    }
    return delta * delta / 32.0;
}

double vc_realizable_exponent(double delta) {
    if (!(delta > 0.0 && delta < 1.0)) {
        throw argument_error("delta must lie in (0, 1)");
    }
    return delta / 4.0;
}

double combined_exponent(double delta, const GlpAnalysis& ga, double d) {
    if (!(delta < ga.delta_max)) {
        throw assumption_violation("delta=" + std::to_string(delta) + " is not below delta_max=" +
                                   std::to_string(ga.delta_max));
    }
    return std::min(vc_realizable_exponent(delta), d);
}

ExponentReport exponent_report(const GlpAnalysis& ga, const AlphabetModel& am, double delta) {
    ExponentReport r;
    r.delta = delta;
    r.vc_agnostic = vc_agnostic_exponent(delta);
    r.vc_realizable = vc_realizable_exponent(delta);
    double d = std::numeric_limits<double>::infinity();
    if (!am.a_matrix.empty()) {
        auto proj = kl_projection(am.q, ConstraintSet(am));
        r.d = proj.d;
        r.p_star = std::move(proj.p_star);
        r.active_row = proj.active_row;
        d = proj.d;
    }
    if (delta < ga.delta_max) {
        r.combined = combined_exponent(delta, ga, d);
    }
    return r;
}

}  // namespace explab
