#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "explab/hypothesis.hpp"
#include "explab/piecewise.hpp"

namespace explab {

// Feature density, ground truth, hypothesis class and deviation threshold.
struct Scenario {
    Density density;
    StepFunction ground_truth;
    HypothesisClassSpec class_spec;
    double delta;
};

struct NondegeneracyResult {
    bool ok = true;
    // First density segment on which every class member coincides.
    std::optional<Interval> witness;
};

NondegeneracyResult check_nondegenerate(const Scenario& sc);

// Throws argument_error / domain_error if the scenario is not usable.
void validate_scenario(const Scenario& sc);

// Regions where the optimum beats GLP i (d) and where GLP i beats the optimum (d_prime).
struct DominatingPair {
    IntervalSet d;
    IntervalSet d_prime;
};

struct GlpAnalysis {
    // Index 0 is the risk minimizer; the rest follow in lexicographic order
    // of their canonical parameters.
    std::vector<Hypothesis> glps;
    // Entry i - 1 belongs to glps[i].
    std::vector<DominatingPair> d_regions;
    std::vector<bool> stable;
    double delta_max = std::numeric_limits<double>::infinity();
    double opt_risk = 0.0;

    bool realizable() const { return opt_risk <= kTolerance; }
    const Hypothesis& optimum() const { return glps.front(); }
};

// {x : a classifies x correctly and b does not}.
IntervalSet dominating_region(const Hypothesis& a, const Hypothesis& b, const StepFunction& g);

// Generalized optimum points among grid-aligned k-boundary hypotheses, with
// their dominating-region pairs. stable and delta_max are left unset.
GlpAnalysis enumerate_glps(const Scenario& sc, double candidate_limit = 1e5);

// Index of the GLP whose region contains theta. Membership in a non-optimal
// GLP's region takes precedence over the optimum's; among non-optimal GLPs
// the lowest index wins.
std::size_t in_A_region(const Hypothesis& theta, const GlpAnalysis& ga, const StepFunction& g,
                        const Density& mu);

// in_A_region with the GLP step functions prepared once, for repeated queries.
class RegionClassifier {
public:
    RegionClassifier(const GlpAnalysis& ga, const StepFunction& g);

    std::size_t classify(const StepFunction& theta) const;
    std::size_t classify(const Hypothesis& theta) const;

private:
    StepFunction g_;
    std::vector<StepFunction> glps_;
};

// A GLP is stable when small perturbations of its boundaries never classify
// any positive-measure set better. Analytic check plus random probing.
bool check_stability(const Hypothesis& glp, const Scenario& sc);

// Smallest excess risk, measured both against the projection and against the
// ground truth, of any hypothesis outside the optimum's region. +inf when
// every hypothesis lies in that region.
double delta_max(const GlpAnalysis& ga, const Scenario& sc, double cell_limit = 1e6);

// enumerate_glps followed by stability flags and delta_max.
GlpAnalysis analyze_structure(const Scenario& sc);

struct Symbol {
    enum class Kind { x, x_prime, complement };

    Kind kind;
    // 1-based GLP indices; empty for the complement symbol.
    std::vector<std::size_t> subset;
    IntervalSet region;

    std::string name() const;
};

struct AlphabetModel {
    Interval domain{0.0, 1.0};
    std::vector<Symbol> symbols;
    // Probability of each symbol; filled by build_alphabet.
    std::vector<double> q;
    // One row per non-optimal GLP, one column per symbol except the complement.
    std::vector<std::vector<int>> a_matrix;

    std::size_t matrix_columns() const;
    // Index of the symbol whose region contains x.
    std::size_t symbol_of(double x) const;
};

// Disjoint symbols X_S, X'_S (S ordered by size, then lexicographically) and
// the complement. Symbols with empty regions are dropped.
AlphabetModel disjointify(const std::vector<DominatingPair>& d_regions, const Interval& domain);

AlphabetModel build_alphabet(const GlpAnalysis& ga, const Density& mu);

}  // namespace explab
