#include "explab/structure.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>

#include "explab/errors.hpp"
#include "explab/rng.hpp"

namespace explab {

namespace {

constexpr std::uint64_t kProbeSeed = 0x57AB1E5EEDULL;
constexpr int kProbeCount = 1000;

// True when a classifies some positive-length piece correctly where b errs.
bool beats_somewhere(const StepFunction& a, const StepFunction& b, const StepFunction& g) {
    const auto& ba = a.breakpoints();
    const auto& bb = b.breakpoints();
    const auto& bg = g.breakpoints();
    std::size_t ia = 0;
    std::size_t ib = 0;
    std::size_t ig = 0;
    int va = a.first_value();
    int vb = b.first_value();
    int vg = g.first_value();
    double x = g.domain().lo();
    const double hi = g.domain().hi();
    const double inf = std::numeric_limits<double>::infinity();
    while (true) {
        double next = std::min({ia < ba.size() ? ba[ia] : inf, ib < bb.size() ? bb[ib] : inf,
                                ig < bg.size() ? bg[ig] : inf, hi});
        if (next - x > kTolerance && va == vg && vb != vg) {
            return true;
        }
        if (next >= hi) {
            return false;
        }
        while (ia < ba.size() && ba[ia] <= next + kTolerance) {
            va ^= 1;
            ++ia;
        }
        while (ib < bb.size() && bb[ib] <= next + kTolerance) {
            vb ^= 1;
            ++ib;
        }
        while (ig < bg.size() && bg[ig] <= next + kTolerance) {
            vg ^= 1;
            ++ig;
        }
        x = next;
    }
}

}  // namespace

NondegeneracyResult check_nondegenerate(const Scenario& sc) {
    const auto& mu = sc.density;
    const Interval& dom = mu.domain();
    // Two members of the class that disagree everywhere, when available.
    std::vector<std::pair<Hypothesis, Hypothesis>> witnesses;
    if (sc.class_spec.is_k_boundary()) {
        auto k = static_cast<std::size_t>(sc.class_spec.k());
        std::vector<double> zero(k, dom.hi());
        std::vector<double> one(k, dom.hi());
        one[0] = dom.lo();
        witnesses.emplace_back(Hypothesis::k_boundary(zero), Hypothesis::k_boundary(one));
    }
    NondegeneracyResult result;
    const auto& bps = mu.breakpoints();
    for (std::size_t i = 0; i <= bps.size(); ++i) {
        Interval seg(i == 0 ? dom.lo() : bps[i - 1], i < bps.size() ? bps[i] : dom.hi());
        double mid = 0.5 * (seg.lo() + seg.hi());
        bool separated = !sc.class_spec.is_k_boundary();  // constant half-planes of both signs
        for (const auto& [h0, h1] : witnesses) {
            separated = separated || h0.evaluate(mid) != h1.evaluate(mid);
        }
        if (!separated) {
            result.ok = false;
            result.witness = seg;
            break;
        }
    }
    return result;
}

void validate_scenario(const Scenario& sc) {
    if (!(sc.delta > 0.0) || !std::isfinite(sc.delta)) {
        throw argument_error("delta must be a positive real");
    }
    if (!(sc.density.domain() == sc.ground_truth.domain())) {
        throw domain_error("density and ground truth are defined on different domains");
    }
    auto nd = check_nondegenerate(sc);
    if (!nd.ok) {
        throw argument_error("hypothesis class is degenerate on [" + std::to_string(nd.witness->lo()) +
                             ", " + std::to_string(nd.witness->hi()) + ")");
    }
}

IntervalSet dominating_region(const Hypothesis& a, const Hypothesis& b, const StepFunction& g) {
    auto fa = a.to_step_function(g.domain());
    auto fb = b.to_step_function(g.domain());
    const StepFunction* fns[] = {&fa, &fb, &g};
    return region_where(fns, [](std::span<const int> v) { return v[0] == v[2] && v[1] != v[2]; });
}

GlpAnalysis enumerate_glps(const Scenario& sc, double candidate_limit) {
    if (!sc.class_spec.is_k_boundary()) {
        throw unsupported_class_error("GLP enumeration needs a k-boundary class");
    }
    const int k = sc.class_spec.k();
    const auto& g = sc.ground_truth;
    const auto& mu = sc.density;
    auto opt = project_ground_truth(g, sc.class_spec, mu);
    auto opt_fn = opt.to_step_function(g.domain());
    auto candidates = grid_aligned_functions(g, k, candidate_limit);

    // Grid-aligned candidates have constant loss on every grid segment.
    auto grid = grid_points(g);
    const std::size_t segs = grid.size() - 1;
    std::vector<std::vector<char>> loss(candidates.size(), std::vector<char>(segs));
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        for (std::size_t s = 0; s < segs; ++s) {
            double mid = 0.5 * (grid[s] + grid[s + 1]);
            loss[c][s] = candidates[c].value_at(mid) != g.value_at(mid) ? 1 : 0;
        }
    }
    GlpAnalysis ga;
    ga.glps.push_back(opt);
    std::vector<Hypothesis> others;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        if (candidates[c] == opt_fn) {
            continue;
        }
        bool glp = true;
        for (std::size_t o = 0; o < candidates.size() && glp; ++o) {
            if (o == c) {
                continue;
            }
            bool strictly_better = false;
            for (std::size_t s = 0; s < segs && !strictly_better; ++s) {
                strictly_better = loss[c][s] == 0 && loss[o][s] == 1;
            }
            glp = strictly_better;
        }
        if (glp) {
            others.push_back(canonical_k_boundary(candidates[c], k));
        }
    }
    std::sort(others.begin(), others.end(),
              [](const Hypothesis& a, const Hypothesis& b) { return a.params() < b.params(); });
    for (auto& h : others) {
        ga.d_regions.push_back({dominating_region(opt, h, g), dominating_region(h, opt, g)});
        ga.glps.push_back(std::move(h));
    }
    ga.opt_risk = risk(opt, g, mu);
    return ga;
}

RegionClassifier::RegionClassifier(const GlpAnalysis& ga, const StepFunction& g) : g_(g) {
    glps_.reserve(ga.glps.size());
    for (const auto& h : ga.glps) {
        glps_.push_back(h.to_step_function(g.domain()));
    }
}

std::size_t RegionClassifier::classify(const StepFunction& theta) const {
    for (std::size_t i = 1; i < glps_.size(); ++i) {
        if (!beats_somewhere(theta, glps_[i], g_)) {
            return i;
        }
    }
    if (!glps_.empty() && !beats_somewhere(theta, glps_.front(), g_)) {
        return 0;
    }
    throw internal_error("hypothesis lies in no GLP region; the GLP set is incomplete");
}

std::size_t RegionClassifier::classify(const Hypothesis& theta) const {
    return classify(theta.to_step_function(g_.domain()));
}

std::size_t in_A_region(const Hypothesis& theta, const GlpAnalysis& ga, const StepFunction& g,
                        const Density& mu) {
    if (!(mu.domain() == g.domain())) {
        throw domain_error("density and ground truth are defined on different domains");
    }
    return RegionClassifier(ga, g).classify(theta);
}

bool check_stability(const Hypothesis& glp, const Scenario& sc) {
    if (glp.kind() != ClassKind::k_boundary) {
        throw unsupported_class_error("stability check needs a k-boundary hypothesis");
    }
    const auto& g = sc.ground_truth;
    const Interval& dom = g.domain();
    auto grid = grid_points(g);
    auto f = glp.to_step_function(dom);

    bool analytic = true;
    for (double b : glp.params()) {
        auto it = std::find_if(grid.begin(), grid.end(),
                               [b](double p) { return std::abs(p - b) <= kTolerance; });
        if (it == grid.end()) {
            analytic = false;
            break;
        }
        auto p = static_cast<std::size_t>(it - grid.begin());
        for (std::size_t s : {p - 1, p}) {
            if (s + 1 >= grid.size()) {  // wraps for p == 0
                continue;
            }
            double mid = 0.5 * (grid[s] + grid[s + 1]);
            if (f.value_at(mid) != g.value_at(mid)) {
                analytic = false;
            }
        }
    }
    if (!analytic) {
        return false;
    }

    double min_seg = dom.length();
    for (std::size_t s = 0; s + 1 < grid.size(); ++s) {
        min_seg = std::min(min_seg, grid[s + 1] - grid[s]);
    }
    const double eps = 0.5 * min_seg;
    std::vector<double> params(glp.params().size());
    for (int probe = 0; probe < kProbeCount; ++probe) {
        for (std::size_t i = 0; i < params.size(); ++i) {
            double u = keyed_uniform(kProbeSeed, Stream::stability_probe, static_cast<std::uint64_t>(probe),
                                     static_cast<std::uint32_t>(i));
            double moved = glp.params()[i] + eps * (2.0 * u - 1.0);
            params[i] = std::clamp(moved, dom.lo(), dom.hi());
        }
        std::sort(params.begin(), params.end());
        auto perturbed = Hypothesis::k_boundary(params).to_step_function(dom);
        if (beats_somewhere(perturbed, f, g)) {
            return false;
        }
    }
    return true;
}

double delta_max(const GlpAnalysis& ga, const Scenario& sc, double cell_limit) {
    if (!sc.class_spec.is_k_boundary()) {
        throw unsupported_class_error("delta_max needs a k-boundary class");
    }
    const auto k = static_cast<std::size_t>(sc.class_spec.k());
    const auto& g = sc.ground_truth;
    const auto& mu = sc.density;
    auto opt_fn = ga.optimum().to_step_function(g.domain());
    auto grid = grid_points(g);
    RegionClassifier regions(ga, g);
    // Locations alternate grid point, open segment, grid point, ...
    const std::size_t locations = 2 * grid.size() - 1;
    double cells = 1.0;
    for (std::size_t i = 1; i <= k; ++i) {
        cells = cells * static_cast<double>(locations + k - i) / static_cast<double>(i);
    }
    if (cells > cell_limit) {
        throw resource_error("parameter grid has too many cells for delta_max");
    }

    double best = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> loc(k, 0);
    while (true) {
        // Representative: boundaries sharing an open segment are spread evenly.
        std::vector<double> rep;
        rep.reserve(k);
        for (std::size_t i = 0; i < k;) {
            std::size_t j = i;
            while (j < k && loc[j] == loc[i]) {
                ++j;
            }
            std::size_t count = j - i;
            if (loc[i] % 2 == 0) {
                rep.insert(rep.end(), count, grid[loc[i] / 2]);
            } else {
                double lo = grid[loc[i] / 2];
                double hi = grid[loc[i] / 2 + 1];
                for (std::size_t c = 1; c <= count; ++c) {
                    rep.push_back(lo + (hi - lo) * static_cast<double>(c) / static_cast<double>(count + 1));
                }
            }
            i = j;
        }
        if (regions.classify(Hypothesis::k_boundary(rep)) != 0) {
            // Risks are monotone per boundary inside a segment, so the
            // infimum over the cell is attained at a closure vertex.
            std::vector<std::pair<std::size_t, std::size_t>> groups;  // (start, count) in open segments
            for (std::size_t i = 0; i < k;) {
                std::size_t j = i;
                while (j < k && loc[j] == loc[i]) {
                    ++j;
                }
                if (loc[i] % 2 == 1) {
                    groups.emplace_back(i, j - i);
                }
                i = j;
            }
            std::vector<std::size_t> left(groups.size(), 0);
            while (true) {
                std::vector<double> vertex = rep;
                for (std::size_t gi = 0; gi < groups.size(); ++gi) {
                    auto [start, count] = groups[gi];
                    double lo = grid[loc[start] / 2];
                    double hi = grid[loc[start] / 2 + 1];
                    for (std::size_t c = 0; c < count; ++c) {
                        vertex[start + c] = c < left[gi] ? lo : hi;
                    }
                }
                auto h = Hypothesis::k_boundary(vertex);
                double to_opt = risk(h, opt_fn, mu);
                double excess = risk(h, g, mu) - ga.opt_risk;
                best = std::min({best, to_opt, excess});
                std::size_t gi = 0;
                while (gi < groups.size() && left[gi] == groups[gi].second) {
                    left[gi] = 0;
                    ++gi;
                }
                if (gi == groups.size()) {
                    break;
                }
                ++left[gi];
            }
        }
        // Next non-decreasing location sequence.
        std::size_t pos = k;
        while (pos > 0 && loc[pos - 1] == locations - 1) {
            --pos;
        }
        if (pos == 0) {
            break;
        }
        std::size_t v = loc[pos - 1] + 1;
        for (std::size_t i = pos - 1; i < k; ++i) {
            loc[i] = v;
        }
    }
    return best;
}

GlpAnalysis analyze_structure(const Scenario& sc) {
    auto ga = enumerate_glps(sc);
    ga.stable.reserve(ga.glps.size());
    for (const auto& h : ga.glps) {
        ga.stable.push_back(check_stability(h, sc));
    }
    ga.delta_max = delta_max(ga, sc);
    return ga;
}

std::string Symbol::name() const {
    if (kind == Kind::complement) {
        return "Xc";
    }
    std::string out = kind == Kind::x ? "X" : "X'";
    for (std::size_t i = 0; i < subset.size(); ++i) {
        if (i > 0) {
            out += ",";
        }
        out += std::to_string(subset[i]);
    }
    return out;
}

std::size_t AlphabetModel::matrix_columns() const {
    return static_cast<std::size_t>(std::count_if(
        symbols.begin(), symbols.end(), [](const Symbol& s) { return s.kind != Symbol::Kind::complement; }));
}

std::size_t AlphabetModel::symbol_of(double x) const {
    for (std::size_t i = 0; i < symbols.size(); ++i) {
        if (symbols[i].region.contains(x)) {
            return i;
        }
    }
    throw domain_error("point " + std::to_string(x) + " lies in no alphabet symbol");
}

AlphabetModel disjointify(const std::vector<DominatingPair>& d_regions, const Interval& domain) {
    const std::size_t K = d_regions.size();
    if (K > 63) {
        throw resource_error("too many dominating-region pairs to disjointify");
    }
    std::vector<double> cuts{domain.lo(), domain.hi()};
    for (const auto& pair : d_regions) {
        for (const auto* s : {&pair.d, &pair.d_prime}) {
            for (const auto& piece : s->intervals()) {
                cuts.push_back(piece.lo());
                cuts.push_back(piece.hi());
            }
        }
    }
    std::sort(cuts.begin(), cuts.end());
    // (kind, membership mask) -> pieces
    std::map<std::pair<int, std::uint64_t>, std::vector<Interval>> pieces;
    double prev = cuts.front();
    for (double c : cuts) {
        if (c - prev <= kTolerance) {
            continue;
        }
        double mid = 0.5 * (prev + c);
        std::uint64_t in_d = 0;
        std::uint64_t in_dp = 0;
        for (std::size_t i = 0; i < K; ++i) {
            if (d_regions[i].d.contains(mid)) {
                in_d |= std::uint64_t{1} << i;
            }
            if (d_regions[i].d_prime.contains(mid)) {
                in_dp |= std::uint64_t{1} << i;
            }
        }
        if (in_d != 0 && in_dp != 0) {
            throw internal_error("dominating regions D and D' overlap");
        }
        if (in_d != 0) {
            pieces[{0, in_d}].emplace_back(prev, c);
        } else if (in_dp != 0) {
            pieces[{1, in_dp}].emplace_back(prev, c);
        } else {
            pieces[{2, 0}].emplace_back(prev, c);
        }
        prev = c;
    }
    AlphabetModel am;
    am.domain = domain;
    for (auto& [key, ivs] : pieces) {
        Symbol sym{key.first == 0   ? Symbol::Kind::x
                   : key.first == 1 ? Symbol::Kind::x_prime
                                    : Symbol::Kind::complement,
                   {}, IntervalSet(std::move(ivs))};
        for (std::size_t i = 0; i < K; ++i) {
            if ((key.second >> i) & 1U) {
                sym.subset.push_back(i + 1);
            }
        }
        if (!sym.region.empty()) {
            am.symbols.push_back(std::move(sym));
        }
    }
    std::stable_sort(am.symbols.begin(), am.symbols.end(), [](const Symbol& a, const Symbol& b) {
        if (a.kind != b.kind) {
            return static_cast<int>(a.kind) < static_cast<int>(b.kind);
        }
        if (a.subset.size() != b.subset.size()) {
            return a.subset.size() < b.subset.size();
        }
        return a.subset < b.subset;
    });
    return am;
}

AlphabetModel build_alphabet(const GlpAnalysis& ga, const Density& mu) {
    auto am = disjointify(ga.d_regions, mu.domain());
    std::vector<Symbol> kept;
    for (auto& sym : am.symbols) {
        double q = measure(sym.region, mu);
        if (q > 0.0) {
            am.q.push_back(q);
            kept.push_back(std::move(sym));
        }
    }
    am.symbols = std::move(kept);
    const std::size_t cols = am.matrix_columns();
    am.a_matrix.assign(ga.d_regions.size(), std::vector<int>(cols, 0));
    std::size_t col = 0;
    for (const auto& sym : am.symbols) {
        if (sym.kind == Symbol::Kind::complement) {
            continue;
        }
        for (std::size_t i : sym.subset) {
            am.a_matrix[i - 1][col] = sym.kind == Symbol::Kind::x ? 1 : -1;
        }
        ++col;
    }
    return am;
}

}  // namespace explab
