#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace explab {

// Absolute tolerance for every geometric predicate. Domains are O(1) scale.
inline constexpr double kTolerance = 1e-12;

// Half-open interval [lo, hi). Never empty.
class Interval {
public:
    Interval(double lo, double hi);

    double lo() const { return lo_; }
    double hi() const { return hi_; }
    double length() const { return hi_ - lo_; }
    bool contains(double x) const { return lo_ <= x && x < hi_; }
    // Closed containment with tolerance; used for parameter and domain checks.
    bool covers(double x) const { return x >= lo_ - kTolerance && x <= hi_ + kTolerance; }
    bool covers(const Interval& other) const { return covers(other.lo_) && covers(other.hi_); }

    friend bool operator==(const Interval& a, const Interval& b);

private:
    double lo_;
    double hi_;
};

// Finite union of half-open intervals kept in canonical form: sorted,
// pairwise disjoint and maximally merged. Pieces no longer than kTolerance
// are dropped, so a non-empty set always has positive length.
class IntervalSet {
public:
    IntervalSet() = default;
    explicit IntervalSet(std::vector<Interval> pieces);
    IntervalSet(std::initializer_list<Interval> pieces);

    const std::vector<Interval>& intervals() const { return pieces_; }
    bool empty() const { return pieces_.empty(); }
    std::size_t size() const { return pieces_.size(); }
    double length() const;
    bool contains(double x) const;

    friend bool operator==(const IntervalSet& a, const IntervalSet& b);

private:
    std::vector<Interval> pieces_;
};

enum class SetOp { intersect, unite, subtract };

IntervalSet set_algebra(SetOp op, const IntervalSet& a, const IntervalSet& b);
IntervalSet intersect(const IntervalSet& a, const IntervalSet& b);
IntervalSet unite(const IntervalSet& a, const IntervalSet& b);
IntervalSet subtract(const IntervalSet& a, const IntervalSet& b);

// Binary piecewise-constant function on a domain. The value alternates at
// every breakpoint, starting from first_value on the left.
class StepFunction {
public:
    StepFunction(Interval domain, std::vector<double> breakpoints, int first_value);

    static StepFunction constant(Interval domain, int value) { return {domain, {}, value}; }

    const Interval& domain() const { return domain_; }
    const std::vector<double>& breakpoints() const { return breakpoints_; }
    int first_value() const { return first_value_; }

    int value_at(double x) const;
    // Value on the segment that starts at breakpoint index i (i = 0 is the first segment).
    int segment_value(std::size_t i) const { return first_value_ ^ static_cast<int>(i & 1U); }
    IntervalSet support() const;

    friend bool operator==(const StepFunction& a, const StepFunction& b);

private:
    Interval domain_;
    std::vector<double> breakpoints_;
    int first_value_;
};

// Piecewise-constant probability density. Every segment carries positive mass.
class Density {
public:
    Density(Interval domain, std::vector<double> breakpoints, std::vector<double> densities);

    static Density uniform(Interval domain);

    const Interval& domain() const { return domain_; }
    const std::vector<double>& breakpoints() const { return breakpoints_; }
    const std::vector<double>& densities() const { return densities_; }

    double density_at(double x) const;
    double cdf(double x) const;
    double mass(double lo, double hi) const;

private:
    std::size_t segment_of(double x) const;

    Interval domain_;
    std::vector<double> breakpoints_;
    std::vector<double> densities_;
    std::vector<double> cumulative_;  // CDF at each segment start, plus 1 at the end
};

// Probability of a set under a density. Throws domain_error when the set
// leaves the density's domain.
double measure(const IntervalSet& s, const Density& mu);

IntervalSet disagreement_region(const StepFunction& f, const StepFunction& h);

// Inverse CDF. u must lie in [0, 1].
double quantile(const Density& mu, double u);

// Set of points where pred holds for the values of all functions, which must
// share one domain. pred receives one value per function, in input order.
IntervalSet region_where(std::span<const StepFunction* const> fns,
                         const std::function<bool(std::span<const int>)>& pred);

}  // namespace explab
