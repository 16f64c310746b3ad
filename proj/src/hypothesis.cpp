#include "explab/hypothesis.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "explab/errors.hpp"

namespace explab {

HypothesisClassSpec HypothesisClassSpec::k_boundary(int k) {
    if (k < 1) {
        throw argument_error("k-boundary class needs k >= 1, got " + std::to_string(k));
    }
    return HypothesisClassSpec(ClassKind::k_boundary, k);
}

int HypothesisClassSpec::k() const {
    if (kind_ != ClassKind::k_boundary) {
        throw unsupported_class_error("boundary count requested for the linear2d class");
    }
    return k_;
}

Hypothesis Hypothesis::k_boundary(std::vector<double> boundaries) {
    if (boundaries.empty()) {
        throw argument_error("k-boundary hypothesis needs at least one boundary");
    }
    for (double b : boundaries) {
        if (!std::isfinite(b)) {
            throw domain_error("k-boundary hypothesis boundaries must be finite");
        }
    }
    if (!std::is_sorted(boundaries.begin(), boundaries.end())) {
        throw domain_error("k-boundary hypothesis boundaries must be sorted");
    }
    return Hypothesis(ClassKind::k_boundary, std::move(boundaries));
}

Hypothesis Hypothesis::linear2d(double b0, double b1, double b2) {
    return Hypothesis(ClassKind::linear2d, {b0, b1, b2});
}

std::size_t Hypothesis::boundary_count() const {
    if (kind_ != ClassKind::k_boundary) {
        throw unsupported_class_error("boundary count requested for a linear hypothesis");
    }
    return params_.size();
}

int Hypothesis::evaluate(double x) const {
    if (kind_ != ClassKind::k_boundary) {
        throw unsupported_class_error("scalar evaluation of a linear hypothesis");
    }
    auto count = std::upper_bound(params_.begin(), params_.end(), x) - params_.begin();
    return static_cast<int>(count & 1);
}

int Hypothesis::evaluate(Point2 p) const {
    if (kind_ != ClassKind::linear2d) {
        throw unsupported_class_error("planar evaluation of a k-boundary hypothesis");
    }
    return params_[0] + params_[1] * p.x1 + params_[2] * p.x2 > 0.0 ? 1 : 0;
}

StepFunction Hypothesis::to_step_function(const Interval& domain) const {
    if (kind_ != ClassKind::k_boundary) {
        throw unsupported_class_error("linear hypotheses have no step-function form");
    }
    int first = 0;
    std::vector<double> breaks;
    std::size_t i = 0;
    while (i < params_.size() && params_[i] <= domain.lo() + kTolerance) {
        first ^= 1;
        ++i;
    }
    while (i < params_.size() && params_[i] < domain.hi() - kTolerance) {
        // Coinciding boundaries toggle in pairs and cancel.
        std::size_t j = i;
        while (j < params_.size() && params_[j] - params_[i] <= kTolerance) {
            ++j;
        }
        if (((j - i) & 1U) != 0) {
            breaks.push_back(params_[i]);
        }
        i = j;
    }
    return StepFunction(domain, std::move(breaks), first);
}

Hypothesis canonical_k_boundary(const StepFunction& f, int k) {
    std::size_t used = static_cast<std::size_t>(f.first_value()) + f.breakpoints().size();
    if (used > static_cast<std::size_t>(k)) {
        throw argument_error("function needs " + std::to_string(used) + " boundaries, class has " +
                             std::to_string(k));
    }
    std::vector<double> params;
    params.reserve(static_cast<std::size_t>(k));
    if (f.first_value() == 1) {
        params.push_back(f.domain().lo());
    }
    params.insert(params.end(), f.breakpoints().begin(), f.breakpoints().end());
    params.resize(static_cast<std::size_t>(k), f.domain().hi());
    return Hypothesis::k_boundary(std::move(params));
}

void validate_hypothesis(const Hypothesis& h, const HypothesisClassSpec& spec, const Interval& domain) {
    if (h.kind() != spec.kind()) {
        throw domain_error("hypothesis kind does not match the class");
    }
    if (!spec.is_k_boundary()) {
        return;
    }
    if (h.params().size() != static_cast<std::size_t>(spec.k())) {
        throw domain_error("hypothesis has " + std::to_string(h.params().size()) +
                           " boundaries, class expects " + std::to_string(spec.k()));
    }
    for (double b : h.params()) {
        if (!domain.covers(b)) {
            throw domain_error("boundary " + std::to_string(b) + " outside the feature domain");
        }
    }
}

double risk(const StepFunction& a, const StepFunction& b, const Density& mu) {
    return measure(disagreement_region(a, b), mu);
}

double risk(const Hypothesis& a, const StepFunction& b, const Density& mu) {
    return risk(a.to_step_function(b.domain()), b, mu);
}

double risk(const Hypothesis& a, const Hypothesis& b, const Density& mu) {
    return risk(a.to_step_function(mu.domain()), b.to_step_function(mu.domain()), mu);
}

EmpiricalRisk empirical_risk(const Hypothesis& h, const LabeledSample& s) {
    if (s.points.empty()) {
        throw argument_error("empirical risk of an empty sample");
    }
    EmpiricalRisk r{0, s.points.size()};
    for (const auto& p : s.points) {
        r.errors += h.evaluate(p.x) != p.y ? 1 : 0;
    }
    return r;
}

EmpiricalRisk empirical_risk(const Hypothesis& h, const LabeledSample2d& s) {
    if (s.points.empty()) {
        throw argument_error("empirical risk of an empty sample");
    }
    EmpiricalRisk r{0, s.points.size()};
    for (const auto& p : s.points) {
        r.errors += h.evaluate(p.x) != p.y ? 1 : 0;
    }
    return r;
}

std::vector<double> grid_points(const StepFunction& f) {
    std::vector<double> grid;
    grid.reserve(f.breakpoints().size() + 2);
    grid.push_back(f.domain().lo());
    grid.insert(grid.end(), f.breakpoints().begin(), f.breakpoints().end());
    grid.push_back(f.domain().hi());
    return grid;
}

namespace {

double binomial(std::size_t n, std::size_t r) {
    if (r > n) {
        return 0.0;
    }
    double out = 1.0;
    for (std::size_t i = 1; i <= r; ++i) {
        out = out * static_cast<double>(n - r + i) / static_cast<double>(i);
    }
    return out;
}

}  // namespace

std::vector<StepFunction> grid_aligned_functions(const StepFunction& g, int k, double limit) {
    const auto& breaks = g.breakpoints();
    const std::size_t m = breaks.size();
    if (binomial(m + 2, static_cast<std::size_t>(k)) > limit) {
        throw resource_error("grid-aligned candidate count C(" + std::to_string(m + 2) + ", " +
                             std::to_string(k) + ") exceeds the limit");
    }
    std::vector<StepFunction> out;
    for (int used = 0; used <= k; ++used) {
        for (int first = 0; first <= 1; ++first) {
            int count = used - first;
            if (count < 0 || static_cast<std::size_t>(count) > m) {
                continue;
            }
            // Lexicographic enumeration of count-subsets of the breakpoints.
            std::vector<std::size_t> idx(static_cast<std::size_t>(count));
            for (std::size_t i = 0; i < idx.size(); ++i) {
                idx[i] = i;
            }
            while (true) {
                std::vector<double> chosen;
                chosen.reserve(idx.size());
                for (auto i : idx) {
                    chosen.push_back(breaks[i]);
                }
                out.emplace_back(g.domain(), std::move(chosen), first);
                std::size_t pos = idx.size();
                while (pos > 0 && idx[pos - 1] == m - idx.size() + pos - 1) {
                    --pos;
                }
                if (pos == 0) {
                    break;
                }
                ++idx[pos - 1];
                for (std::size_t j = pos; j < idx.size(); ++j) {
                    idx[j] = idx[j - 1] + 1;
                }
            }
        }
    }
    return out;
}

Hypothesis project_ground_truth(const StepFunction& g, const HypothesisClassSpec& spec,
                                const Density& mu) {
    if (!spec.is_k_boundary()) {
        throw unsupported_class_error("ground-truth projection needs a k-boundary class");
    }
    const int k = spec.k();
    const StepFunction* best = nullptr;
    double best_risk = 0.0;
    std::size_t best_used = 0;
    std::vector<double> best_params;
    auto candidates = grid_aligned_functions(g, k);
    for (const auto& f : candidates) {
        double r = risk(f, g, mu);
        std::size_t used = static_cast<std::size_t>(f.first_value()) + f.breakpoints().size();
        auto params = canonical_k_boundary(f, k).params();
        bool better = best == nullptr || r < best_risk - kTolerance;
        if (!better && std::abs(r - best_risk) <= kTolerance) {
            better = used < best_used || (used == best_used && params < best_params);
        }
        if (better) {
            best = &f;
            best_risk = r;
            best_used = used;
            best_params = std::move(params);
        }
    }
    return Hypothesis::k_boundary(std::move(best_params));
}

}  // namespace explab
