#include "explab/montecarlo.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "explab/errors.hpp"
#include "explab/rng.hpp"

namespace explab {

namespace {

constexpr double kZ95 = 1.959963984540054;
constexpr double kCompositionLimit = 1e8;
constexpr std::uint64_t kRealizableSeedMix = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kConditionalSeedMix = 0xC2B2AE3D27D4EB4FULL;

// Runs body(trial, counts) for every trial on worker_count() threads and
// returns the summed integer counters. Sums do not depend on scheduling.
template <std::size_t N, class Body>
std::array<std::uint64_t, N> count_trials(std::uint64_t trials, Body body) {
    const std::uint64_t workers = std::max<std::uint64_t>(1, std::min<std::uint64_t>(worker_count(), trials));
    std::vector<std::array<std::uint64_t, N>> partial(workers, std::array<std::uint64_t, N>{});
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&](std::uint64_t w) {
        try {
            for (std::uint64_t t = w; t < trials; t += workers) {
                body(t, partial[w]);
            }
        } catch (...) {
            std::lock_guard<std::mutex> lock(failure_mutex);
            if (!failure) {
                failure = std::current_exception();
            }
        }
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::uint64_t w = 0; w < workers; ++w) {
            pool.emplace_back(work, w);
        }
        for (auto& th : pool) {
            th.join();
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
    std::array<std::uint64_t, N> total{};
    for (const auto& p : partial) {
        for (std::size_t i = 0; i < N; ++i) {
            total[i] += p[i];
        }
    }
    return total;
}

double binomial_count(std::size_t n, std::size_t r) {
    double out = 1.0;
    for (std::size_t i = 1; i <= r; ++i) {
        out = out * static_cast<double>(n - r + i) / static_cast<double>(i);
    }
    return out;
}

}  // namespace

void McConfig::validate() const {
    if (trials < 1) {
        throw argument_error("trials must be at least 1");
    }
    if (n_values.empty()) {
        throw argument_error("n grid is empty");
    }
    for (std::size_t i = 0; i < n_values.size(); ++i) {
        if (n_values[i] < 1) {
            throw argument_error("sample sizes must be positive");
        }
        if (i > 0 && n_values[i] <= n_values[i - 1]) {
            throw argument_error("sample sizes must be strictly increasing");
        }
    }
}

double McEstimate::ci_low() const {
    if (successes == 0) {
        return 0.0;
    }
    return std::max(0.0, p_hat - ci_half_width);
}

double McEstimate::ci_high() const { return std::min(1.0, p_hat + ci_half_width); }

double McEstimate::std_error() const {
    if (trials == 0) {
        return 0.0;
    }
    return std::sqrt(p_hat * (1.0 - p_hat) / static_cast<double>(trials));
}

McEstimate make_estimate(std::size_t n, std::uint64_t successes, std::uint64_t trials) {
    McEstimate e;
    e.n = n;
    e.successes = successes;
    e.trials = trials;
    if (trials == 0) {
        return e;
    }
    e.p_hat = static_cast<double>(successes) / static_cast<double>(trials);
    if (successes == 0) {
        e.ci_half_width = 1.0 - std::pow(0.05, 1.0 / static_cast<double>(trials));
    } else {
        e.ci_half_width = kZ95 * e.std_error();
    }
    return e;
}

unsigned worker_count() {
    if (const char* env = std::getenv("EXPLAB_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) {
            return static_cast<unsigned>(std::min<long>(v, 1024));
        }
    }
    return std::max(1U, std::thread::hardware_concurrency());
}

std::vector<double> sample_features(const Density& mu, std::size_t n, std::uint64_t seed, std::uint64_t trial) {
    std::vector<double> xs(n);
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = quantile(mu, keyed_uniform(seed, Stream::features, trial, static_cast<std::uint32_t>(i)));
    }
    return xs;
}

namespace {

GlpAnalysis prepared_analysis(const Scenario& sc) {
    validate_scenario(sc);
    auto ga = enumerate_glps(sc);
    ga.delta_max = delta_max(ga, sc);
    return ga;
}

}  // namespace

LearningProblem::LearningProblem(const Scenario& sc)
    : sc_(sc),
      ga_(prepared_analysis(sc)),
      f_opt_(ga_.optimum().to_step_function(sc.ground_truth.domain())),
      erm_g_(sc.class_spec.k(), sc.density, sc.ground_truth),
      erm_fopt_(sc.class_spec.k(), sc.density, f_opt_),
      regions_(ga_, sc.ground_truth) {}

LearningProblem::Trial LearningProblem::run(std::size_t n, std::uint64_t seed, std::uint64_t trial) const {
    auto xs = sample_features(sc_.density, n, seed, trial);
    std::sort(xs.begin(), xs.end());
    std::vector<int> by_g(n);
    std::vector<int> by_fopt(n);
    for (std::size_t i = 0; i < n; ++i) {
        by_g[i] = sc_.ground_truth.value_at(xs[i]);
        by_fopt[i] = f_opt_.value_at(xs[i]);
    }
    auto learned_g = erm_g_.solve(xs, by_g);
    auto learned_fopt = erm_fopt_.solve(xs, by_fopt);
    Trial t{std::move(xs), std::move(learned_g), std::move(learned_fopt)};
    const auto& dom = sc_.ground_truth.domain();
    auto fg = t.erm_g.hypothesis.to_step_function(dom);
    t.excess_g = risk(fg, sc_.ground_truth, sc_.density) - ga_.opt_risk;
    t.fopt_risk_g = risk(fg, f_opt_, sc_.density);
    t.fopt_risk_fopt = risk(t.erm_fopt.hypothesis.to_step_function(dom), f_opt_, sc_.density);
    t.region_g = regions_.classify(fg);
    return t;
}

McEstimate estimate_pac_error(const LearningProblem& lp, std::size_t n, std::uint64_t trials, std::uint64_t seed) {
    const double delta = lp.scenario().delta;
    auto counts = count_trials<1>(trials, [&](std::uint64_t t, std::array<std::uint64_t, 1>& c) {
        c[0] += lp.run(n, seed, t).excess_g > delta ? 1 : 0;
    });
    return make_estimate(n, counts[0], trials);
}

McEstimate estimate_realizable_term(const LearningProblem& lp, std::size_t n, std::uint64_t trials,
                                    std::uint64_t seed) {
    const double delta = lp.scenario().delta;
    auto counts = count_trials<1>(trials, [&](std::uint64_t t, std::array<std::uint64_t, 1>& c) {
        c[0] += lp.run(n, seed, t).fopt_risk_fopt > delta ? 1 : 0;
    });
    return make_estimate(n, counts[0], trials);
}

ConditionalEstimate estimate_conditional_term(const LearningProblem& lp, std::size_t n, std::uint64_t trials,
                                              std::uint64_t seed) {
    const double delta = lp.scenario().delta;
    auto counts = count_trials<2>(trials, [&](std::uint64_t t, std::array<std::uint64_t, 2>& c) {
        auto r = lp.run(n, seed, t);
        if (r.fopt_risk_fopt < delta) {
            ++c[0];
            c[1] += r.region_g != 0 ? 1 : 0;
        }
    });
    ConditionalEstimate out;
    out.estimate = make_estimate(n, counts[1], counts[0]);
    out.attempted = trials;
    out.degenerate = counts[0] == 0;
    return out;
}

McEstimate estimate_union_probability(const AlphabetModel& am, const Density& mu, std::size_t n,
                                      std::uint64_t trials, std::uint64_t seed) {
    ConstraintSet cs(am);
    auto counts = count_trials<1>(trials, [&](std::uint64_t t, std::array<std::uint64_t, 1>& c) {
        std::vector<long long> symbol_counts(am.symbols.size(), 0);
        for (double x : sample_features(mu, n, seed, t)) {
            ++symbol_counts[am.symbol_of(x)];
        }
        c[0] += cs.contains_counts(symbol_counts) ? 1 : 0;
    });
    return make_estimate(n, counts[0], trials);
}

double exact_union_log_probability(const AlphabetModel& am, std::size_t n, long long shift) {
    const std::size_t m = am.symbols.size();
    if (m == 0 || m > 4) {
        throw resource_error("exact type enumeration supports 1 to 4 symbols, got " + std::to_string(m));
    }
    if (binomial_count(n + m - 1, m - 1) > kCompositionLimit) {
        throw resource_error("exact type enumeration for n=" + std::to_string(n) + " exceeds 1e8 compositions");
    }
    if (am.q.size() != m) {
        throw argument_error("alphabet probabilities do not match its symbols");
    }
    const std::size_t cols = am.matrix_columns();
    std::vector<double> log_fact(n + 1, 0.0);
    for (std::size_t i = 2; i <= n; ++i) {
        log_fact[i] = log_fact[i - 1] + std::log(static_cast<double>(i));
    }
    std::vector<double> log_q(m);
    for (std::size_t j = 0; j < m; ++j) {
        log_q[j] = std::log(am.q[j]);
    }
    double top = -std::numeric_limits<double>::infinity();
    double scaled = 0.0;  // sum of exp(term - top)
    std::vector<std::size_t> c(m, 0);
    c[m - 1] = n;
    while (true) {
        bool hit = false;
        for (const auto& row : am.a_matrix) {
            long long s = shift;
            for (std::size_t j = 0; j < cols; ++j) {
                s += row[j] * static_cast<long long>(c[j]);
            }
            if (s <= 0) {
                hit = true;
                break;
            }
        }
        if (hit) {
            double term = log_fact[n];
            for (std::size_t j = 0; j < m; ++j) {
                term += static_cast<double>(c[j]) * log_q[j] - log_fact[c[j]];
            }
            if (term > top) {
                scaled = scaled * std::exp(top - term) + 1.0;
                top = term;
            } else {
                scaled += std::exp(term - top);
            }
        }
        std::size_t j = m - 1;
        while (j > 0 && c[j] == 0) {
            --j;
        }
        if (j == 0) {
            break;
        }
        std::size_t rest = c[j] - 1;
        c[j] = 0;
        ++c[j - 1];
        c[m - 1] = rest;
    }
    if (scaled == 0.0) {
        return -std::numeric_limits<double>::infinity();
    }
    return top + std::log(scaled);
}

double exact_union_probability(const AlphabetModel& am, std::size_t n) {
    return std::exp(exact_union_log_probability(am, n, 0));
}

Sandwich exact_shifted_probability(const AlphabetModel& am, std::size_t n, std::size_t ell) {
    if (ell > n) {
        throw argument_error("shift exceeds the sample size");
    }
    return Sandwich{std::exp(exact_union_log_probability(am, n - ell, static_cast<long long>(ell))),
                    exact_union_probability(am, n)};
}

std::size_t minimal_sequence_length(const Scenario& sc) {
    if (!sc.class_spec.is_k_boundary()) {
        throw unsupported_class_error("minimal sequence length needs a k-boundary class");
    }
    return 2 * static_cast<std::size_t>(sc.class_spec.k());
}

ExponentFit fit_exponent_log(const std::vector<std::pair<std::size_t, double>>& log_points) {
    ExponentFit fit;
    std::vector<std::pair<double, double>> used;
    for (const auto& [n, log_p] : log_points) {
        if (!std::isfinite(log_p)) {
            fit.pointwise.push_back(std::numeric_limits<double>::quiet_NaN());
            fit.dropped.push_back(n);
            continue;
        }
        double y = -log_p;
        fit.pointwise.push_back(n > 0 ? y / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN());
        used.emplace_back(static_cast<double>(n), y);
    }
    if (used.size() >= 2) {
        double mx = 0.0;
        double my = 0.0;
        for (const auto& [x, y] : used) {
            mx += x;
            my += y;
        }
        mx /= static_cast<double>(used.size());
        my /= static_cast<double>(used.size());
        double sxy = 0.0;
        double sxx = 0.0;
        for (const auto& [x, y] : used) {
            sxy += (x - mx) * (y - my);
            sxx += (x - mx) * (x - mx);
        }
        if (sxx > 0.0) {
            fit.d_hat = sxy / sxx;
        }
    }
    return fit;
}

ExponentFit fit_exponent(const std::vector<std::pair<std::size_t, double>>& points) {
    std::vector<std::pair<std::size_t, double>> logs;
    logs.reserve(points.size());
    for (const auto& [n, p] : points) {
        if (p < 0.0 || p > 1.0 || std::isnan(p)) {
            throw argument_error("probabilities must lie in [0, 1]");
        }
        logs.emplace_back(n, p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity());
    }
    return fit_exponent_log(logs);
}

namespace {

std::string describe_trial(const LearningProblem::Trial& t, const StepFunction& g, const StepFunction& f_opt) {
    std::ostringstream os;
    os.precision(17);
    os << "features:";
    for (double x : t.features) {
        os << ' ' << x;
    }
    os << "\nlabels g:";
    for (double x : t.features) {
        os << ' ' << g.value_at(x);
    }
    os << "\nlabels f_opt:";
    for (double x : t.features) {
        os << ' ' << f_opt.value_at(x);
    }
    os << "\nerm on g labels:";
    for (double b : t.erm_g.hypothesis.params()) {
        os << ' ' << b;
    }
    os << "\nerm on f_opt labels:";
    for (double b : t.erm_fopt.hypothesis.params()) {
        os << ' ' << b;
    }
    os << "\nexcess risk " << t.excess_g << ", f_opt risk " << t.fopt_risk_g << ", f_opt risk of f_opt erm "
       << t.fopt_risk_fopt << '\n';
    return os.str();
}

}  // namespace

DecompositionReport verify_decomposition(const LearningProblem& lp, std::size_t n, std::uint64_t trials,
                                         std::uint64_t seed) {
    const double delta = lp.scenario().delta;
    if (!(delta < lp.analysis().delta_max)) {
        throw assumption_violation("decomposition check needs delta below delta_max=" +
                                   std::to_string(lp.analysis().delta_max));
    }
    DecompositionReport rep;
    rep.n = n;
    // Counters: deviations, equivalence violations, coupling violations.
    auto counts = count_trials<3>(trials, [&](std::uint64_t t, std::array<std::uint64_t, 3>& c) {
        auto r = lp.run(n, seed, t);
        bool excess = r.excess_g > delta;
        bool fopt = r.fopt_risk_g > delta;
        c[0] += excess ? 1 : 0;
        c[1] += excess != fopt ? 1 : 0;
        c[2] += (r.fopt_risk_fopt > delta && !fopt) ? 1 : 0;
    });
    rep.lhs = make_estimate(n, counts[0], trials);
    rep.equivalence_violations = counts[1];
    rep.coupling_violations = counts[2];
    if (counts[1] + counts[2] > 0) {
        for (std::uint64_t t = 0; t < trials; ++t) {
            auto r = lp.run(n, seed, t);
            bool fopt = r.fopt_risk_g > delta;
            if ((r.excess_g > delta) != fopt || (r.fopt_risk_fopt > delta && !fopt)) {
                rep.counterexample = "trial " + std::to_string(t) + "\n" +
                                     describe_trial(r, lp.scenario().ground_truth, lp.f_opt());
                break;
            }
        }
    }
    rep.p_r = estimate_realizable_term(lp, n, trials, seed ^ kRealizableSeedMix);
    rep.cond = estimate_conditional_term(lp, n, trials, seed ^ kConditionalSeedMix);
    const double pr = rep.p_r.p_hat;
    const double cond = rep.cond.estimate.p_hat;
    rep.rhs = pr + (1.0 - pr) * cond;
    const double s_lhs = rep.lhs.std_error();
    const double s_pr = (1.0 - cond) * rep.p_r.std_error();
    const double s_cond = (1.0 - pr) * rep.cond.estimate.std_error();
    rep.sigma = std::sqrt(s_lhs * s_lhs + s_pr * s_pr + s_cond * s_cond);
    const double gap = std::abs(rep.lhs.p_hat - rep.rhs);
    rep.identity_holds = rep.sigma > 0.0 ? gap <= 3.0 * rep.sigma : gap == 0.0;
    return rep;
}

}  // namespace explab
