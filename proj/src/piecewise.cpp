#include "explab/piecewise.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "explab/errors.hpp"

namespace explab {

namespace {

bool near(double a, double b) { return std::abs(a - b) <= kTolerance; }

std::vector<double> sorted_cuts(std::vector<double> cuts) {
    std::sort(cuts.begin(), cuts.end());
    std::vector<double> out;
    out.reserve(cuts.size());
    for (double c : cuts) {
        if (out.empty() || c - out.back() > kTolerance) {
            out.push_back(c);
        }
    }
    return out;
}

}  // namespace

Interval::Interval(double lo, double hi) : lo_(lo), hi_(hi) {
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) {
        throw domain_error("interval requires finite lo < hi, got [" + std::to_string(lo) + ", " +
                           std::to_string(hi) + ")");
    }
}

bool operator==(const Interval& a, const Interval& b) {
    return near(a.lo_, b.lo_) && near(a.hi_, b.hi_);
}

IntervalSet::IntervalSet(std::initializer_list<Interval> pieces)
    : IntervalSet(std::vector<Interval>(pieces)) {}

IntervalSet::IntervalSet(std::vector<Interval> pieces) {
    std::erase_if(pieces, [](const Interval& i) { return i.length() <= kTolerance; });
    std::sort(pieces.begin(), pieces.end(),
              [](const Interval& a, const Interval& b) { return a.lo() < b.lo(); });
    for (const auto& piece : pieces) {
        if (!pieces_.empty() && piece.lo() <= pieces_.back().hi() + kTolerance) {
            double hi = std::max(pieces_.back().hi(), piece.hi());
            pieces_.back() = Interval(pieces_.back().lo(), hi);
        } else {
            pieces_.push_back(piece);
        }
    }
}

double IntervalSet::length() const {
    double total = 0.0;
    for (const auto& piece : pieces_) {
        total += piece.length();
    }
    return total;
}

bool IntervalSet::contains(double x) const {
    auto it = std::upper_bound(pieces_.begin(), pieces_.end(), x,
                               [](double v, const Interval& i) { return v < i.lo(); });
    if (it == pieces_.begin()) {
        return false;
    }
    return std::prev(it)->contains(x);
}

bool operator==(const IntervalSet& a, const IntervalSet& b) { return a.pieces_ == b.pieces_; }

IntervalSet set_algebra(SetOp op, const IntervalSet& a, const IntervalSet& b) {
    std::vector<double> cuts;
    for (const auto* s : {&a, &b}) {
        for (const auto& piece : s->intervals()) {
            cuts.push_back(piece.lo());
            cuts.push_back(piece.hi());
        }
    }
    cuts = sorted_cuts(std::move(cuts));
    std::vector<Interval> out;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        double mid = 0.5 * (cuts[i] + cuts[i + 1]);
        bool in_a = a.contains(mid);
        bool in_b = b.contains(mid);
        bool keep = false;
        switch (op) {
            case SetOp::intersect: keep = in_a && in_b; break;
            case SetOp::unite: keep = in_a || in_b; break;
            case SetOp::subtract: keep = in_a && !in_b; break;
        }
        if (keep) {
            out.emplace_back(cuts[i], cuts[i + 1]);
        }
    }
    return IntervalSet(std::move(out));
}

IntervalSet intersect(const IntervalSet& a, const IntervalSet& b) {
    return set_algebra(SetOp::intersect, a, b);
}
IntervalSet unite(const IntervalSet& a, const IntervalSet& b) {
    return set_algebra(SetOp::unite, a, b);
}
IntervalSet subtract(const IntervalSet& a, const IntervalSet& b) {
    return set_algebra(SetOp::subtract, a, b);
}

StepFunction::StepFunction(Interval domain, std::vector<double> breakpoints, int first_value)
    : domain_(domain), breakpoints_(std::move(breakpoints)), first_value_(first_value) {
    if (first_value != 0 && first_value != 1) {
        throw argument_error("step function first_value must be 0 or 1");
    }
    double prev = domain_.lo();
    for (double b : breakpoints_) {
        if (!(b - prev > kTolerance)) {
            throw domain_error("step function breakpoints must be strictly increasing and lie "
                               "strictly inside the domain");
        }
        prev = b;
    }
    if (!breakpoints_.empty() && !(domain_.hi() - breakpoints_.back() > kTolerance)) {
        throw domain_error("step function breakpoint at or beyond the domain end");
    }
}

int StepFunction::value_at(double x) const {
    auto count = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x) - breakpoints_.begin();
    return first_value_ ^ static_cast<int>(count & 1);
}

IntervalSet StepFunction::support() const {
    std::vector<Interval> pieces;
    double lo = domain_.lo();
    for (std::size_t i = 0; i <= breakpoints_.size(); ++i) {
        double hi = i < breakpoints_.size() ? breakpoints_[i] : domain_.hi();
        if (segment_value(i) == 1) {
            pieces.emplace_back(lo, hi);
        }
        lo = hi;
    }
    return IntervalSet(std::move(pieces));
}

bool operator==(const StepFunction& a, const StepFunction& b) {
    if (!(a.domain_ == b.domain_) || a.first_value_ != b.first_value_ ||
        a.breakpoints_.size() != b.breakpoints_.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.breakpoints_.size(); ++i) {
        if (!near(a.breakpoints_[i], b.breakpoints_[i])) {
            return false;
        }
    }
    return true;
}

Density::Density(Interval domain, std::vector<double> breakpoints, std::vector<double> densities)
    : domain_(domain), breakpoints_(std::move(breakpoints)), densities_(std::move(densities)) {
    if (densities_.size() != breakpoints_.size() + 1) {
        throw argument_error("density needs exactly one value per segment");
    }
    double prev = domain_.lo();
    for (double b : breakpoints_) {
        if (!(b - prev > kTolerance)) {
            throw domain_error("density breakpoints must be strictly increasing inside the domain");
        }
        prev = b;
    }
    if (!breakpoints_.empty() && !(domain_.hi() - breakpoints_.back() > kTolerance)) {
        throw domain_error("density breakpoint at or beyond the domain end");
    }
    cumulative_.reserve(densities_.size() + 1);
    cumulative_.push_back(0.0);
    for (std::size_t i = 0; i < densities_.size(); ++i) {
        if (!std::isfinite(densities_[i]) || !(densities_[i] > 0.0)) {
            throw domain_error("density values must be finite and strictly positive");
        }
        double lo = i == 0 ? domain_.lo() : breakpoints_[i - 1];
        double hi = i < breakpoints_.size() ? breakpoints_[i] : domain_.hi();
        cumulative_.push_back(cumulative_.back() + densities_[i] * (hi - lo));
    }
    if (std::abs(cumulative_.back() - 1.0) > kTolerance) {
        throw domain_error("density must integrate to 1, got " + std::to_string(cumulative_.back()));
    }
}

Density Density::uniform(Interval domain) { return {domain, {}, {1.0 / domain.length()}}; }

std::size_t Density::segment_of(double x) const {
    return static_cast<std::size_t>(std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x) -
                                    breakpoints_.begin());
}

double Density::density_at(double x) const { return densities_[segment_of(x)]; }

double Density::cdf(double x) const {
    if (x <= domain_.lo()) {
        return 0.0;
    }
    if (x >= domain_.hi()) {
        return 1.0;
    }
    std::size_t i = segment_of(x);
    double seg_lo = i == 0 ? domain_.lo() : breakpoints_[i - 1];
    return std::min(1.0, cumulative_[i] + densities_[i] * (x - seg_lo));
}

double Density::mass(double lo, double hi) const { return std::max(0.0, cdf(hi) - cdf(lo)); }

double measure(const IntervalSet& s, const Density& mu) {
    double total = 0.0;
    for (const auto& piece : s.intervals()) {
        if (!mu.domain().covers(piece)) {
            throw domain_error("interval [" + std::to_string(piece.lo()) + ", " +
                               std::to_string(piece.hi()) + ") lies outside the density domain");
        }
        total += mu.mass(piece.lo(), piece.hi());
    }
    return std::clamp(total, 0.0, 1.0);
}

IntervalSet disagreement_region(const StepFunction& f, const StepFunction& h) {
    const StepFunction* fns[] = {&f, &h};
    return region_where(fns, [](std::span<const int> v) { return v[0] != v[1]; });
}

double quantile(const Density& mu, double u) {
    if (!(u >= 0.0 && u <= 1.0)) {
        throw argument_error("quantile level must lie in [0, 1]");
    }
    const auto& dom = mu.domain();
    if (u == 0.0) {
        return dom.lo();
    }
    if (u == 1.0) {
        return dom.hi();
    }
    const auto& bps = mu.breakpoints();
    const auto& dens = mu.densities();
    // Locate the segment whose CDF range contains u.
    std::size_t i = 0;
    double cum = 0.0;
    for (; i + 1 < dens.size(); ++i) {
        double seg_lo = i == 0 ? dom.lo() : bps[i - 1];
        double next = cum + dens[i] * (bps[i] - seg_lo);
        if (u < next) {
            break;
        }
        cum = next;
    }
    double seg_lo = i == 0 ? dom.lo() : bps[i - 1];
    double seg_hi = i < bps.size() ? bps[i] : dom.hi();
    return std::clamp(seg_lo + (u - cum) / dens[i], seg_lo, seg_hi);
}

IntervalSet region_where(std::span<const StepFunction* const> fns,
                         const std::function<bool(std::span<const int>)>& pred) {
    if (fns.empty()) {
        return {};
    }
    const Interval& dom = fns.front()->domain();
    std::vector<double> cuts{dom.lo(), dom.hi()};
    for (const auto* f : fns) {
        if (!(f->domain() == dom)) {
            throw domain_error("step functions are defined on different domains");
        }
        cuts.insert(cuts.end(), f->breakpoints().begin(), f->breakpoints().end());
    }
    cuts = sorted_cuts(std::move(cuts));
    std::vector<int> values(fns.size());
    std::vector<Interval> out;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        double mid = 0.5 * (cuts[i] + cuts[i + 1]);
        for (std::size_t j = 0; j < fns.size(); ++j) {
            values[j] = fns[j]->value_at(mid);
        }
        if (pred(values)) {
            out.emplace_back(cuts[i], cuts[i + 1]);
        }
    }
    return IntervalSet(std::move(out));
}

}  // namespace explab
