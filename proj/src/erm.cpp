#include <algorithm>
#include <cmath>
#include <limits>

#include "explab/errors.hpp"
#include "explab/hypothesis.hpp"

namespace explab {

KBoundaryErm::KBoundaryErm(int k, const Density& mu, const StepFunction& target)
    : k_(k), mu_(mu), target_(target) {
    if (k < 1) {
        throw argument_error("k-boundary ERM needs k >= 1");
    }
    if (!(mu.domain() == target.domain())) {
        throw domain_error("ERM target and density live on different domains");
    }
    const Interval& dom = mu.domain();
    std::vector<double> cuts{dom.lo(), dom.hi()};
    cuts.insert(cuts.end(), target.breakpoints().begin(), target.breakpoints().end());
    cuts.insert(cuts.end(), mu.breakpoints().begin(), mu.breakpoints().end());
    std::sort(cuts.begin(), cuts.end());
    for (double c : cuts) {
        if (cuts_.empty() || c - cuts_.back() > kTolerance) {
            cuts_.push_back(c);
        }
    }
    const std::size_t segs = cuts_.size() - 1;
    slope_.resize(segs);
    cut_tail_.assign(cuts_.size(), 0.0);
    for (std::size_t i = 0; i < segs; ++i) {
        double mid = 0.5 * (cuts_[i] + cuts_[i + 1]);
        double density = mu.density_at(mid);
        int t = target.value_at(mid);
        slope_[i] = (t == 1 ? -1.0 : 1.0) * density;
        if (t == 1) {
            target_mass_ += density * (cuts_[i + 1] - cuts_[i]);
        }
    }
    for (std::size_t i = segs; i-- > 0;) {
        cut_tail_[i] = cut_tail_[i + 1] + slope_[i] * (cuts_[i + 1] - cuts_[i]);
    }
    candidates_ = grid_points(target);
}

double KBoundaryErm::tail(double t) const {
    if (t <= cuts_.front()) {
        return cut_tail_.front();
    }
    if (t >= cuts_.back()) {
        return 0.0;
    }
    auto i = static_cast<std::size_t>(std::upper_bound(cuts_.begin(), cuts_.end(), t) - cuts_.begin()) - 1;
    return cut_tail_[i + 1] + slope_[i] * (cuts_[i + 1] - t);
}

namespace {

struct Node {
    bool live = false;
    std::size_t errors = 0;
    double objective = 0.0;
};

// (prefix ++ repeat x count) < other, lexicographically; both have equal length.
bool extended_less(const double* prefix, std::size_t len, double x, std::size_t count, const double* other) {
    for (std::size_t i = 0; i < len; ++i) {
        if (prefix[i] != other[i]) {
            return prefix[i] < other[i];
        }
    }
    for (std::size_t i = 0; i < count; ++i) {
        double o = other[len + i];
        if (x != o) {
            return x < o;
        }
    }
    return false;
}

}  // namespace

ErmResult KBoundaryErm::solve(std::span<const double> xs, std::span<const int> labels) const {
    if (xs.size() != labels.size()) {
        throw argument_error("ERM sample and label counts differ");
    }
    const auto k = static_cast<std::size_t>(k_);
    const double lo = mu_.domain().lo();
    const double hi = mu_.domain().hi();

    // Dynamic program over events sorted by position. State m counts the
    // boundaries placed so far; the hypothesis value to the right of the
    // current position is m mod 2. Each state keeps the best (fewest errors,
    // largest target risk, lexicographically smallest boundaries) prefix;
    // row m of the boundary buffers holds that prefix's m boundaries.
    std::vector<Node> cur(k + 1);
    std::vector<Node> next(k + 1);
    std::vector<double> cur_b((k + 1) * k);
    std::vector<double> next_b((k + 1) * k);
    cur[0].live = true;
    cur[0].objective = target_mass_;

    auto place = [&](double pos) {
        const double psi = tail(pos);
        next = cur;
        next_b = cur_b;
        for (std::size_t m = 0; m < k; ++m) {
            if (!cur[m].live) {
                continue;
            }
            double objective = cur[m].objective;
            for (std::size_t t = 1; m + t <= k; ++t) {
                std::size_t idx = m + t;
                objective += (idx & 1U) != 0 ? psi : -psi;
                Node& slot = next[idx];
                bool take = !slot.live || cur[m].errors < slot.errors;
                if (!take && cur[m].errors == slot.errors) {
                    if (objective > slot.objective + kTolerance) {
                        take = true;
                    } else if (objective >= slot.objective - kTolerance) {
                        take = extended_less(&cur_b[m * k], m, pos, t, &next_b[idx * k]);
                    }
                }
                if (take) {
                    slot.live = true;
                    slot.errors = cur[m].errors;
                    slot.objective = objective;
                    std::copy_n(&cur_b[m * k], m, &next_b[idx * k]);
                    std::fill_n(&next_b[idx * k + m], t, pos);
                }
            }
        }
        std::swap(cur, next);
        std::swap(cur_b, next_b);
    };
    auto observe = [&](std::size_t zeros, std::size_t ones) {
        for (std::size_t m = 0; m <= k; ++m) {
            if (cur[m].live) {
                cur[m].errors += (m & 1U) != 0 ? zeros : ones;
            }
        }
    };

    std::size_t ci = 0;
    std::size_t si = 0;
    while (ci < candidates_.size() || si < xs.size()) {
        double cand = ci < candidates_.size() ? candidates_[ci] : std::numeric_limits<double>::infinity();
        double sample = si < xs.size() ? xs[si] : std::numeric_limits<double>::infinity();
        if (cand < sample - kTolerance) {
            place(cand);
            ++ci;
            continue;
        }
        if (sample < lo - kTolerance || sample > hi + kTolerance) {
            throw domain_error("sample point outside the feature domain");
        }
        std::size_t zeros = 0;
        std::size_t ones = 0;
        std::size_t sj = si;
        while (sj < xs.size() && xs[sj] - sample <= kTolerance) {
            if (labels[sj] == 1) {
                ++ones;
            } else if (labels[sj] == 0) {
                ++zeros;
            } else {
                throw argument_error("labels must be 0 or 1");
            }
            ++sj;
        }
        if (sj < xs.size() && xs[sj] < sample) {
            throw argument_error("ERM sample must be sorted ascending");
        }
        // A boundary at the sample position either counts for it (before)
        // or closes the gap to its right (after).
        place(sample);
        observe(zeros, ones);
        place(sample);
        if (std::abs(cand - sample) <= kTolerance) {
            ++ci;
        }
        si = sj;
    }

    const Node& best = cur[k];
    if (!best.live) {
        throw internal_error("ERM dynamic program ended without a full hypothesis");
    }
    auto raw = Hypothesis::k_boundary(std::vector<double>(cur_b.begin() + static_cast<std::ptrdiff_t>(k * k), cur_b.end()));
    return ErmResult{canonical_k_boundary(raw.to_step_function(mu_.domain()), k_), best.errors,
                     xs.size(), best.objective};
}

ErmResult erm_kboundary(const LabeledSample& s, const HypothesisClassSpec& spec, const Density& mu,
                        const StepFunction& g) {
    if (!spec.is_k_boundary()) {
        throw unsupported_class_error("erm_kboundary needs a k-boundary class");
    }
    std::vector<LabeledPoint> pts = s.points;
    std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.x < b.x; });
    std::vector<double> xs;
    std::vector<int> ys;
    xs.reserve(pts.size());
    ys.reserve(pts.size());
    for (const auto& p : pts) {
        xs.push_back(p.x);
        ys.push_back(p.y);
    }
    return KBoundaryErm(spec.k(), mu, g).solve(xs, ys);
}

namespace {

double dot(Point2 a, Point2 b) { return a.x1 * b.x1 + a.x2 * b.x2; }
Point2 minus(Point2 a, Point2 b) { return {a.x1 - b.x1, a.x2 - b.x2}; }

}  // namespace

Erm2dResult erm_linear2d(const LabeledSample2d& s) {
    const auto& pts = s.points;
    const std::size_t n = pts.size();
    if (n == 0) {
        throw argument_error("linear ERM needs at least one sample point");
    }
    Erm2dResult best{Hypothesis::linear2d(1.0, 0.0, 0.0), 0, n};
    best.errors = empirical_risk(best.hypothesis, s).errors;
    auto consider = [&](double b0, double b1, double b2) {
        auto h = Hypothesis::linear2d(b0, b1, b2);
        auto errors = empirical_risk(h, s).errors;
        if (errors < best.errors) {
            best.hypothesis = h;
            best.errors = errors;
        }
    };
    consider(-1.0, 0.0, 0.0);

    double scale = 1.0;
    for (const auto& p : pts) {
        scale = std::max({scale, std::abs(p.x.x1), std::abs(p.x.x2)});
    }
    std::vector<std::size_t> on_line;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            Point2 d = minus(pts[j].x, pts[i].x);
            double len2 = dot(d, d);
            if (len2 == 0.0) {
                continue;
            }
            Point2 w{-d.x2, d.x1};
            const double eps = 1e-12 * std::sqrt(len2) * scale;
            double gap = std::numeric_limits<double>::infinity();
            on_line.clear();
            for (std::size_t l = 0; l < n; ++l) {
                double sl = dot(w, minus(pts[l].x, pts[i].x));
                if (std::abs(sl) <= eps) {
                    on_line.push_back(l);
                } else {
                    gap = std::min(gap, std::abs(sl));
                }
            }
            std::sort(on_line.begin(), on_line.end(), [&](std::size_t a, std::size_t b) {
                return dot(d, minus(pts[a].x, pts[i].x)) < dot(d, minus(pts[b].x, pts[i].x));
            });
            const double offset = std::isfinite(gap) ? 0.5 * gap : 1.0;
            for (double sigma : {1.0, -1.0}) {
                double w1 = sigma * w.x1;
                double w2 = sigma * w.x2;
                double base = -(w1 * pts[i].x.x1 + w2 * pts[i].x.x2);
                // Shift the line off every collinear point, to either side.
                consider(base + offset, w1, w2);
                consider(base - offset, w1, w2);
                // Rotate about a pivot between consecutive collinear points.
                for (std::size_t a = 0; a + 1 < on_line.size(); ++a) {
                    double ta = dot(d, minus(pts[on_line[a]].x, pts[i].x));
                    double tb = dot(d, minus(pts[on_line[a + 1]].x, pts[i].x));
                    if (!(tb > ta)) {
                        continue;
                    }
                    double c = 0.5 * (ta + tb) / len2;
                    Point2 pivot{pts[i].x.x1 + c * d.x1, pts[i].x.x2 + c * d.x2};
                    double spread = 0.0;
                    for (const auto& p : pts) {
                        spread = std::max(spread, std::abs(dot(d, minus(p.x, pivot))));
                    }
                    double eta = std::isfinite(gap) ? 0.5 * gap / spread : 1.0;
                    for (double tau : {1.0, -1.0}) {
                        double v1 = w1 + eta * tau * d.x1;
                        double v2 = w2 + eta * tau * d.x2;
                        consider(-(v1 * pivot.x1 + v2 * pivot.x2), v1, v2);
                    }
                }
            }
        }
    }
    return best;
}

}  // namespace explab
