#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "explab/structure.hpp"

namespace explab {

// Distributions p on the alphabet for which some row i of A has a_i . p <= 0.
// Matrix columns index the leading alphabet symbols; trailing symbols (the
// complement) carry coefficient 0.
class ConstraintSet {
public:
    ConstraintSet(std::vector<std::vector<int>> a_matrix, std::size_t alphabet_size);
    explicit ConstraintSet(const AlphabetModel& am);

    const std::vector<std::vector<int>>& rows() const { return rows_; }
    std::size_t alphabet_size() const { return alphabet_size_; }
    std::size_t columns() const { return columns_; }
    // Coefficient of symbol j in row i, 0 beyond the matrix columns.
    int coefficient(std::size_t i, std::size_t j) const { return j < columns_ ? rows_[i][j] : 0; }

    // Exact membership test for a vector of symbol counts.
    bool contains_counts(std::span<const long long> counts) const;

private:
    std::vector<std::vector<int>> rows_;
    std::size_t alphabet_size_;
    std::size_t columns_;
};

bool in_pi(std::span<const double> p, const ConstraintSet& cs);

// Nats. +infinity when p puts mass where q has none.
double kl_divergence(std::span<const double> p, std::span<const double> q);

struct Projection {
    double d = 0.0;
    std::vector<double> p_star;
    std::size_t active_row = 0;
    // Tilting parameter of the active row; 0 when q already lies in the set.
    double lambda = 0.0;
};

// Information projection of q onto the constraint set, solved row by row in
// the exponential family q_j exp(-lambda a_ij) / Z.
Projection kl_projection(std::span<const double> q, const ConstraintSet& cs);

// Minimum KL divergence over simplex points with the given denominator that
// fall in the set. An upper bound on kl_projection.
double kl_projection_grid_oracle(std::span<const double> q, const ConstraintSet& cs, int resolution);

double vc_agnostic_exponent(double delta);
double vc_realizable_exponent(double delta);

// min(delta / 4, d). Throws assumption_violation unless delta < delta_max.
double combined_exponent(double delta, const GlpAnalysis& ga, double d);

struct ExponentReport {
    // Absent for realizable scenarios, where only the realizable VC rate applies.
    std::optional<double> d;
    std::vector<double> p_star;
    std::size_t active_row = 0;
    double vc_agnostic = 0.0;
    double vc_realizable = 0.0;
    // Absent when delta is not below delta_max.
    std::optional<double> combined;
    double delta = 0.0;
};

ExponentReport exponent_report(const GlpAnalysis& ga, const AlphabetModel& am, double delta);

}  // namespace explab
