#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "explab/exponent.hpp"
#include "explab/structure.hpp"

namespace explab {

struct McConfig {
    std::vector<std::size_t> n_values;
    std::uint64_t trials = 1;
    std::uint64_t seed = 0;

    void validate() const;
};

struct McEstimate {
    std::size_t n = 0;
    double p_hat = 0.0;
    // Normal-approximation 95% half width; for zero successes the one-sided
    // 95% upper bound 1 - 0.05^(1/trials).
    double ci_half_width = 0.0;
    std::uint64_t successes = 0;
    std::uint64_t trials = 0;

    double ci_low() const;
    double ci_high() const;
    // Binomial standard error of p_hat.
    double std_error() const;
};

McEstimate make_estimate(std::size_t n, std::uint64_t successes, std::uint64_t trials);

// Worker count: EXPLAB_THREADS when set to a positive integer, otherwise the
// hardware concurrency.
unsigned worker_count();

std::vector<double> sample_features(const Density& mu, std::size_t n, std::uint64_t seed, std::uint64_t trial);

// Everything one trial needs, prepared once per scenario.
class LearningProblem {
public:
    explicit LearningProblem(const Scenario& sc);

    const Scenario& scenario() const { return sc_; }
    const GlpAnalysis& analysis() const { return ga_; }
    const StepFunction& f_opt() const { return f_opt_; }

    struct Trial {
        std::vector<double> features;
        ErmResult erm_g;      // learned from labels y = g(x)
        ErmResult erm_fopt;   // learned from labels y = f_opt(x)
        double excess_g = 0.0;       // R_g(erm_g) - R_g(theta_opt)
        double fopt_risk_g = 0.0;    // R_f_opt(erm_g)
        double fopt_risk_fopt = 0.0; // R_f_opt(erm_fopt)
        std::size_t region_g = 0;    // GLP region of erm_g
    };

    Trial run(std::size_t n, std::uint64_t seed, std::uint64_t trial) const;

private:
    Scenario sc_;
    GlpAnalysis ga_;
    StepFunction f_opt_;
    KBoundaryErm erm_g_;
    KBoundaryErm erm_fopt_;
    RegionClassifier regions_;
};

// Fraction of trials with R_g(erm) - R_g(theta_opt) > delta.
McEstimate estimate_pac_error(const LearningProblem& lp, std::size_t n, std::uint64_t trials, std::uint64_t seed);

// Fraction of trials with R_f_opt(erm on f_opt labels) > delta.
McEstimate estimate_realizable_term(const LearningProblem& lp, std::size_t n, std::uint64_t trials,
                                    std::uint64_t seed);

struct ConditionalEstimate {
    // Successes and trials count kept trials only.
    McEstimate estimate;
    std::uint64_t attempted = 0;
    bool degenerate = false;  // no trial was kept
};

// Among trials whose f_opt-labelled ERM stays within delta of f_opt, the
// fraction whose g-labelled ERM on the same features leaves the optimum's region.
ConditionalEstimate estimate_conditional_term(const LearningProblem& lp, std::size_t n, std::uint64_t trials,
                                              std::uint64_t seed);

// Monte Carlo estimate of the probability that the symbol counts of n draws lie in the constraint set.
McEstimate estimate_union_probability(const AlphabetModel& am, const Density& mu, std::size_t n,
                                      std::uint64_t trials, std::uint64_t seed);

// Natural log of the probability that n multinomial(q) counts lie in the
// constraint set, with every row condition shifted by `shift`:
// a_i . c + shift <= 0 for some i. Throws resource_error beyond 4 symbols or
// 10^8 compositions.
double exact_union_log_probability(const AlphabetModel& am, std::size_t n, long long shift = 0);
double exact_union_probability(const AlphabetModel& am, std::size_t n);

struct Sandwich {
    double lower = 0.0;
    double upper = 0.0;
};

// lower: shifted event over n - ell draws; upper: unshifted event over n draws.
Sandwich exact_shifted_probability(const AlphabetModel& am, std::size_t n, std::size_t ell);

std::size_t minimal_sequence_length(const Scenario& sc);

struct ExponentFit {
    // Least-squares slope of -ln p against n; absent with fewer than two usable points.
    std::optional<double> d_hat;
    // -ln(p) / n per input point; NaN where p = 0.
    std::vector<double> pointwise;
    // Sample sizes dropped because p = 0.
    std::vector<std::size_t> dropped;
};

ExponentFit fit_exponent(const std::vector<std::pair<std::size_t, double>>& points);
// Same fit from natural-log probabilities; -infinity marks a zero.
ExponentFit fit_exponent_log(const std::vector<std::pair<std::size_t, double>>& log_points);

struct DecompositionReport {
    std::size_t n = 0;
    McEstimate lhs;
    McEstimate p_r;
    ConditionalEstimate cond;
    double rhs = 0.0;
    double sigma = 0.0;  // combined standard error of lhs - rhs
    bool identity_holds = false;
    // Trials where {excess risk > delta} and {R_f_opt > delta} disagree.
    std::uint64_t equivalence_violations = 0;
    // Trials where the f_opt-labelled ERM deviates but the g-labelled one does not.
    std::uint64_t coupling_violations = 0;
    std::string counterexample;
};

// Estimates both sides of the decomposition with independent seeds and checks
// the per-trial equivalence on the left-hand-side trials.
DecompositionReport verify_decomposition(const LearningProblem& lp, std::size_t n, std::uint64_t trials,
                                         std::uint64_t seed);

}  // namespace explab
