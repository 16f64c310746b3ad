#pragma once

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "explab/piecewise.hpp"

namespace explab {

enum class ClassKind { k_boundary, linear2d };

// Which hypothesis family a scenario learns with. k-boundary classes carry
// their boundary count; the 2-D linear class has no parameters.
class HypothesisClassSpec {
public:
    static HypothesisClassSpec k_boundary(int k);
    static HypothesisClassSpec linear2d() { return HypothesisClassSpec(ClassKind::linear2d, 0); }

    ClassKind kind() const { return kind_; }
    bool is_k_boundary() const { return kind_ == ClassKind::k_boundary; }
    // Boundary count; throws unsupported_class_error for linear2d.
    int k() const;

    friend bool operator==(const HypothesisClassSpec&, const HypothesisClassSpec&) = default;

private:
    HypothesisClassSpec(ClassKind kind, int k) : kind_(kind), k_(k) {}

    ClassKind kind_;
    int k_;
};

struct Point2 {
    double x1;
    double x2;
};

// A member of a hypothesis class. k-boundary hypotheses store their sorted
// boundaries b_1 <= ... <= b_k and evaluate to the parity of #{i : b_i <= x}.
// Linear hypotheses store (b0, b1, b2) and evaluate 1(b0 + b1 x1 + b2 x2 > 0).
class Hypothesis {
public:
    static Hypothesis k_boundary(std::vector<double> boundaries);
    static Hypothesis linear2d(double b0, double b1, double b2);

    ClassKind kind() const { return kind_; }
    const std::vector<double>& params() const { return params_; }
    std::size_t boundary_count() const;

    int evaluate(double x) const;
    int evaluate(Point2 p) const;

    // Realized function on a domain. Boundaries at or below the domain start
    // flip the initial value; boundaries at the domain end have no effect.
    StepFunction to_step_function(const Interval& domain) const;

    friend bool operator==(const Hypothesis&, const Hypothesis&) = default;

private:
    Hypothesis(ClassKind kind, std::vector<double> params) : kind_(kind), params_(std::move(params)) {}

    ClassKind kind_;
    std::vector<double> params_;
};

// Canonical k-boundary parameters of a realized function: the domain start
// when the function starts at 1, then its breakpoints, then padding at the
// domain end. Throws argument_error when f needs more than k boundaries.
Hypothesis canonical_k_boundary(const StepFunction& f, int k);

// Throws domain_error unless h belongs to the class on the given domain.
void validate_hypothesis(const Hypothesis& h, const HypothesisClassSpec& spec, const Interval& domain);

struct LabeledPoint {
    double x;
    int y;
};

struct LabeledPoint2 {
    Point2 x;
    int y;
};

struct LabeledSample {
    std::vector<LabeledPoint> points;
};

struct LabeledSample2d {
    std::vector<LabeledPoint2> points;
};

// Mismatch count kept as an exact ratio.
struct EmpiricalRisk {
    std::size_t errors = 0;
    std::size_t n = 0;

    double value() const { return static_cast<double>(errors) / static_cast<double>(n); }
    friend bool operator==(const EmpiricalRisk&, const EmpiricalRisk&) = default;
};

double risk(const StepFunction& a, const StepFunction& b, const Density& mu);
double risk(const Hypothesis& a, const StepFunction& b, const Density& mu);
double risk(const Hypothesis& a, const Hypothesis& b, const Density& mu);

EmpiricalRisk empirical_risk(const Hypothesis& h, const LabeledSample& s);
EmpiricalRisk empirical_risk(const Hypothesis& h, const LabeledSample2d& s);

// Domain endpoints plus the breakpoints of f, in increasing order.
std::vector<double> grid_points(const StepFunction& f);

// Every realized k-boundary function whose breakpoints are breakpoints of g,
// i.e. first value v and breakpoint subset S with v + |S| <= k. Throws
// resource_error when C(M + 2, k) exceeds limit, M = number of g breakpoints.
std::vector<StepFunction> grid_aligned_functions(const StepFunction& g, int k, double limit = 1e5);

// Risk minimizer over the k-boundary class. Ties go to fewer effective
// boundaries, then to the lexicographically smallest canonical parameters.
Hypothesis project_ground_truth(const StepFunction& g, const HypothesisClassSpec& spec,
                                const Density& mu);

struct ErmResult {
    Hypothesis hypothesis;
    // Empirical errors of the minimizing cell. At a closure vertex the
    // returned hypothesis can differ from the cell on a sample point.
    std::size_t errors = 0;
    std::size_t n = 0;
    // True risk of the returned hypothesis against the tie-break target.
    double target_risk = 0.0;
};

// Exact 0-1 empirical risk minimizer for the k-boundary class with the
// worst-true-risk tie-break. Preprocesses the target once so repeated calls
// on fresh samples avoid redundant work.
class KBoundaryErm {
public:
    KBoundaryErm(int k, const Density& mu, const StepFunction& target);

    // xs must be sorted ascending; labels[i] belongs to xs[i].
    ErmResult solve(std::span<const double> xs, std::span<const int> labels) const;

    int k() const { return k_; }
    const StepFunction& target() const { return target_; }

    // Signed tail integral of (1 - 2 target) over [t, hi); the target risk of
    // boundaries b is P(target = 1) + sum_i (-1)^(i-1) tail(b_i).
    double tail(double t) const;

private:
    int k_;
    Density mu_;
    StepFunction target_;
    double target_mass_ = 0.0;
    std::vector<double> cuts_;
    std::vector<double> cut_tail_;
    std::vector<double> slope_;
    std::vector<double> candidates_;
};

ErmResult erm_kboundary(const LabeledSample& s, const HypothesisClassSpec& spec, const Density& mu,
                        const StepFunction& g);

struct Erm2dResult {
    Hypothesis hypothesis;
    std::size_t errors = 0;
    std::size_t n = 0;
};

// Exact 0-1 minimizer over half-planes in the plane. Enumerates lines through
// sample pairs under every infinitesimal perturbation; the first minimizer in
// enumeration order wins. No true-risk tie-break is applied for this class.
Erm2dResult erm_linear2d(const LabeledSample2d& s);

}  // namespace explab
