#include "explab/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "explab/exponent.hpp"
#include "explab/montecarlo.hpp"

namespace explab {

namespace {

const Json& field(const Json& obj, const std::string& key, const std::string& path) {
    auto it = obj.find(key);
    if (it == obj.end()) {
        throw input_error(path + "." + key, "missing field");
    }
    return *it;
}

void reject_unknown(const Json& obj, std::initializer_list<const char*> known, const std::string& path) {
    std::unordered_set<std::string> allowed(known.begin(), known.end());
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!allowed.contains(it.key())) {
            throw input_error(path + "." + it.key(), "unknown field");
        }
    }
}

const Json& object_at(const Json& j, const std::string& path) {
    if (!j.is_object()) {
        throw input_error(path, "expected an object");
    }
    return j;
}

double number_at(const Json& j, const std::string& path) {
    if (!j.is_number()) {
        throw input_error(path, "expected a number");
    }
    double v = j.get<double>();
    if (!std::isfinite(v)) {
        throw input_error(path, "expected a finite number");
    }
    return v;
}

long long integer_at(const Json& j, const std::string& path) {
    if (!j.is_number_integer()) {
        throw input_error(path, "expected an integer");
    }
    return j.get<long long>();
}

std::vector<double> numbers_at(const Json& j, const std::string& path) {
    if (!j.is_array()) {
        throw input_error(path, "expected an array of numbers");
    }
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        out.push_back(number_at(j[i], path + "[" + std::to_string(i) + "]"));
    }
    return out;
}

// Runs make(), turning library validation failures into field-path errors.
template <class F>
auto at_path(const std::string& path, F make) {
    try {
        return make();
    } catch (const input_error&) {
        throw;
    } catch (const error& e) {
        throw input_error(path, e.what());
    }
}

Json numbers_json(const std::vector<double>& v) {
    Json a = Json::array();
    for (double x : v) {
        a.push_back(x);
    }
    return a;
}

Json intervals_json(const IntervalSet& s) {
    Json a = Json::array();
    for (const auto& piece : s.intervals()) {
        a.push_back(Json::array({piece.lo(), piece.hi()}));
    }
    return a;
}

void dump_into(const Json& j, int indent, int depth, std::string& out) {
    auto newline = [&](int d) {
        if (indent > 0) {
            out += '\n';
            out.append(static_cast<std::size_t>(indent * d), ' ');
        }
    };
    switch (j.type()) {
        case Json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += '{';
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) {
                    out += ',';
                }
                first = false;
                newline(depth + 1);
                out += Json(it.key()).dump();
                out += indent > 0 ? ": " : ":";
                dump_into(it.value(), indent, depth + 1, out);
            }
            newline(depth);
            out += '}';
            return;
        }
        case Json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            // Arrays of scalars stay on one line.
            bool flat = std::none_of(j.begin(), j.end(), [](const Json& v) { return v.is_structured(); });
            out += '[';
            bool first = true;
            for (const auto& v : j) {
                if (!first) {
                    out += flat && indent > 0 ? ", " : ",";
                }
                first = false;
                if (!flat) {
                    newline(depth + 1);
                }
                dump_into(v, indent, depth + 1, out);
            }
            if (!flat) {
                newline(depth);
            }
            out += ']';
            return;
        }
        case Json::value_t::number_float: {
            double v = j.get<double>();
            out += std::isfinite(v) ? format_number(v) : Json(format_number(v)).dump();
            return;
        }
        default:
            out += j.dump();
    }
}

std::string csv_number(double v) { return std::isfinite(v) ? format_number(v) : std::string(); }

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw error("cannot open " + path + " for writing");
    }
    out << text;
    if (!out) {
        throw error("failed writing " + path);
    }
}

Json classification_probes(const Scenario& sc, const GlpAnalysis& ga) {
    const Interval& dom = sc.ground_truth.domain();
    const auto k = static_cast<std::size_t>(sc.class_spec.k());
    RegionClassifier regions(ga, sc.ground_truth);
    Json probes = Json::array();
    constexpr int kSteps = 20;
    for (int i = 0; i <= kSteps; ++i) {
        std::vector<double> params(k, dom.hi());
        params[0] = dom.lo() + dom.length() * i / kSteps;
        auto h = Hypothesis::k_boundary(params);
        Json p;
        p["boundaries"] = numbers_json(params);
        p["region"] = regions.classify(h);
        probes.push_back(std::move(p));
    }
    return probes;
}

const char* mode_name(SimulateMode m) {
    switch (m) {
        case SimulateMode::pac:
            return "pac";
        case SimulateMode::conditional:
            return "conditional";
        case SimulateMode::decomposition:
            return "decomposition";
    }
    return "";
}

template <class F>
int guarded(std::ostream& err, F body) {
    try {
        return body();
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e);
    }
}

}  // namespace

Scenario parse_scenario(const Json& doc) {
    object_at(doc, "$");
    reject_unknown(doc, {"domain", "density", "ground_truth", "class", "delta"}, "$");

    const Json& dom_j = field(doc, "domain", "$");
    auto bounds = numbers_at(dom_j, "$.domain");
    if (bounds.size() != 2) {
        throw input_error("$.domain", "expected [lo, hi]");
    }
    Interval domain = at_path("$.domain", [&] { return Interval(bounds[0], bounds[1]); });

    const Json& dens_j = object_at(field(doc, "density", "$"), "$.density");
    reject_unknown(dens_j, {"breakpoints", "values"}, "$.density");
    auto dens_breaks = numbers_at(field(dens_j, "breakpoints", "$.density"), "$.density.breakpoints");
    auto dens_values = numbers_at(field(dens_j, "values", "$.density"), "$.density.values");
    if (dens_values.size() != dens_breaks.size() + 1) {
        throw input_error("$.density.values", "expected one value per segment (" +
                                                  std::to_string(dens_breaks.size() + 1) + ")");
    }
    for (std::size_t i = 0; i < dens_values.size(); ++i) {
        if (!(dens_values[i] > 0.0)) {
            throw input_error("$.density.values[" + std::to_string(i) + "]", "density must be positive");
        }
    }
    Density density = at_path("$.density", [&] { return Density(domain, dens_breaks, dens_values); });

    const Json& gt_j = object_at(field(doc, "ground_truth", "$"), "$.ground_truth");
    reject_unknown(gt_j, {"breakpoints", "first_value"}, "$.ground_truth");
    auto gt_breaks = numbers_at(field(gt_j, "breakpoints", "$.ground_truth"), "$.ground_truth.breakpoints");
    auto first = integer_at(field(gt_j, "first_value", "$.ground_truth"), "$.ground_truth.first_value");
    if (first != 0 && first != 1) {
        throw input_error("$.ground_truth.first_value", "expected 0 or 1");
    }
    StepFunction truth =
        at_path("$.ground_truth", [&] { return StepFunction(domain, gt_breaks, static_cast<int>(first)); });

    const Json& cls_j = object_at(field(doc, "class", "$"), "$.class");
    const Json& type_j = field(cls_j, "type", "$.class");
    if (!type_j.is_string()) {
        throw input_error("$.class.type", "expected a string");
    }
    auto type = type_j.get<std::string>();
    std::optional<HypothesisClassSpec> spec;
    if (type == "k_boundary") {
        reject_unknown(cls_j, {"type", "k"}, "$.class");
        auto k = integer_at(field(cls_j, "k", "$.class"), "$.class.k");
        if (k < 1 || k > 1000) {
            throw input_error("$.class.k", "expected an integer in [1, 1000]");
        }
        spec = HypothesisClassSpec::k_boundary(static_cast<int>(k));
    } else if (type == "linear2d") {
        reject_unknown(cls_j, {"type"}, "$.class");
        spec = HypothesisClassSpec::linear2d();
    } else {
        throw input_error("$.class.type", "expected \"k_boundary\" or \"linear2d\"");
    }

    double delta = number_at(field(doc, "delta", "$"), "$.delta");
    if (!(delta > 0.0)) {
        throw input_error("$.delta", "must be positive");
    }
    Scenario sc{std::move(density), std::move(truth), *spec, delta};
    at_path("$", [&] {
        validate_scenario(sc);
        return 0;
    });
    return sc;
}

Scenario parse_scenario_text(const std::string& text) {
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const Json::exception& e) {
        throw input_error("$", std::string("malformed JSON: ") + e.what());
    }
    return parse_scenario(doc);
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw input_error(path, "cannot read scenario file");
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_scenario_text(text.str());
}

Json scenario_to_json(const Scenario& sc) {
    Json doc;
    const Interval& dom = sc.density.domain();
    doc["domain"] = Json::array({dom.lo(), dom.hi()});
    doc["density"]["breakpoints"] = numbers_json(sc.density.breakpoints());
    doc["density"]["values"] = numbers_json(sc.density.densities());
    doc["ground_truth"]["breakpoints"] = numbers_json(sc.ground_truth.breakpoints());
    doc["ground_truth"]["first_value"] = sc.ground_truth.first_value();
    if (sc.class_spec.is_k_boundary()) {
        doc["class"]["type"] = "k_boundary";
        doc["class"]["k"] = sc.class_spec.k();
    } else {
        doc["class"]["type"] = "linear2d";
    }
    doc["delta"] = sc.delta;
    return doc;
}

std::string format_number(double v) {
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string dump_json(const Json& doc, int indent) {
    std::string out;
    dump_into(doc, indent, 0, out);
    out += '\n';
    return out;
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const assumption_violation*>(&e) != nullptr) {
        return exit_assumption;
    }
    if (dynamic_cast<const resource_error*>(&e) != nullptr) {
        return exit_resource;
    }
    if (dynamic_cast<const argument_error*>(&e) != nullptr || dynamic_cast<const domain_error*>(&e) != nullptr ||
        dynamic_cast<const unsupported_class_error*>(&e) != nullptr ||
        dynamic_cast<const Json::exception*>(&e) != nullptr) {
        return exit_invalid_input;
    }
    return exit_failure;
}

AnalyzeOutput analyze(const Scenario& sc) {
    if (!sc.class_spec.is_k_boundary()) {
        throw unsupported_class_error("analyze needs a k_boundary class");
    }
    auto ga = analyze_structure(sc);
    auto am = build_alphabet(ga, sc.density);
    auto ex = exponent_report(ga, am, sc.delta);

    AnalyzeOutput out;
    Json& r = out.report;
    r["scenario"] = scenario_to_json(sc);
    Json glps = Json::array();
    for (std::size_t i = 0; i < ga.glps.size(); ++i) {
        Json g;
        g["index"] = i;
        g["boundaries"] = numbers_json(ga.glps[i].params());
        g["risk"] = risk(ga.glps[i], sc.ground_truth, sc.density);
        g["stable"] = static_cast<bool>(ga.stable[i]);
        glps.push_back(std::move(g));
    }
    r["glps"] = std::move(glps);
    r["a_regions_sample_classification"] = classification_probes(sc, ga);
    Json dr = Json::array();
    for (std::size_t i = 0; i < ga.d_regions.size(); ++i) {
        Json d;
        d["glp"] = i + 1;
        d["d"] = intervals_json(ga.d_regions[i].d);
        d["d_prime"] = intervals_json(ga.d_regions[i].d_prime);
        dr.push_back(std::move(d));
    }
    r["d_regions"] = std::move(dr);
    Json symbols = Json::array();
    for (const auto& s : am.symbols) {
        Json j;
        j["name"] = s.name();
        j["intervals"] = intervals_json(s.region);
        symbols.push_back(std::move(j));
    }
    r["alphabet"]["symbols"] = std::move(symbols);
    r["alphabet"]["q"] = numbers_json(am.q);
    r["alphabet"]["a_matrix"] = am.a_matrix;
    r["delta_max"] = ga.delta_max;
    Json& e = r["exponents"];
    if (ex.d) {
        e["d"] = *ex.d;
        e["p_star"] = numbers_json(ex.p_star);
        e["active_row"] = ex.active_row;
    }
    e["vc_agnostic"] = ex.vc_agnostic;
    e["vc_realizable"] = ex.vc_realizable;
    if (ex.combined) {
        e["combined"] = *ex.combined;
    }
    Json notes = Json::array();
    if (ga.realizable()) {
        notes.push_back("realizable: exponent delta/4");
    }
    if (!(sc.delta < ga.delta_max)) {
        out.warnings.push_back("delta must be below delta_max: delta=" + format_number(sc.delta) +
                               ", delta_max=" + format_number(ga.delta_max));
    }
    if (!ga.stable.front()) {
        out.warnings.push_back("the risk minimizer is not a stable GLP");
    }
    if (!ga.realizable() && ga.glps.size() < 2) {
        out.warnings.push_back("agnostic scenario produced a single GLP");
    }
    r["notes"] = std::move(notes);
    r["warnings"] = out.warnings;
    return out;
}

std::vector<std::size_t> parse_n_grid(const std::string& spec) {
    std::vector<long long> parts;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ':')) {
        try {
            std::size_t used = 0;
            long long v = std::stoll(item, &used);
            if (used != item.size()) {
                throw std::invalid_argument(item);
            }
            parts.push_back(v);
        } catch (const std::logic_error&) {
            throw input_error("--n-grid", "expected integers a:b:step, got \"" + spec + "\"");
        }
    }
    if (parts.size() != 3 || parts[0] < 1 || parts[1] < parts[0] || parts[2] < 1) {
        throw input_error("--n-grid", "expected a:b:step with 1 <= a <= b and step >= 1");
    }
    std::vector<std::size_t> grid;
    for (long long n = parts[0]; n <= parts[1]; n += parts[2]) {
        grid.push_back(static_cast<std::size_t>(n));
    }
    return grid;
}

SeriesOutput simulate(const Scenario& sc, const SimulateOptions& opt) {
    McConfig cfg{opt.n_grid, opt.trials, opt.seed};
    cfg.validate();
    LearningProblem lp(sc);
    if (opt.mode == SimulateMode::decomposition && !(sc.delta < lp.analysis().delta_max)) {
        throw assumption_violation("decomposition mode needs delta below delta_max=" +
                                   format_number(lp.analysis().delta_max));
    }
    std::ostringstream csv;
    csv << "n,p_hat,ci_low,ci_high,exponent_pointwise";
    if (opt.mode == SimulateMode::decomposition) {
        csv << ",p_r,cond,rhs,sigma,identity_holds,equivalence_violations,coupling_violations";
    }
    csv << "\r\n";
    std::vector<std::pair<std::size_t, double>> points;
    Json kept = Json::array();
    bool identity_ok = true;
    for (std::size_t n : cfg.n_values) {
        McEstimate est;
        std::optional<DecompositionReport> dec;
        switch (opt.mode) {
            case SimulateMode::pac:
                est = estimate_pac_error(lp, n, cfg.trials, cfg.seed);
                break;
            case SimulateMode::conditional: {
                auto c = estimate_conditional_term(lp, n, cfg.trials, cfg.seed);
                est = c.estimate;
                kept.push_back(c.estimate.trials);
                break;
            }
            case SimulateMode::decomposition:
                dec = verify_decomposition(lp, n, cfg.trials, cfg.seed);
                est = dec->lhs;
                identity_ok = identity_ok && dec->identity_holds && dec->equivalence_violations == 0 &&
                              dec->coupling_violations == 0;
                break;
        }
        points.emplace_back(n, est.p_hat);
        double pointwise = est.p_hat > 0.0 ? -std::log(est.p_hat) / static_cast<double>(n)
                                           : std::numeric_limits<double>::quiet_NaN();
        csv << n << ',' << format_number(est.p_hat) << ',' << format_number(est.ci_low()) << ','
            << format_number(est.ci_high()) << ',' << csv_number(pointwise);
        if (dec) {
            csv << ',' << format_number(dec->p_r.p_hat) << ',' << format_number(dec->cond.estimate.p_hat) << ','
                << format_number(dec->rhs) << ',' << format_number(dec->sigma) << ','
                << (dec->identity_holds ? 1 : 0) << ',' << dec->equivalence_violations << ','
                << dec->coupling_violations;
        }
        csv << "\r\n";
    }
    auto fit = fit_exponent(points);
    SeriesOutput out;
    out.csv = csv.str();
    Json& side = out.sidecar;
    side["mode"] = mode_name(opt.mode);
    side["trials"] = cfg.trials;
    side["seed"] = cfg.seed;
    if (fit.d_hat) {
        side["d_hat"] = *fit.d_hat;
    } else {
        side["note"] = "fewer than two nonzero estimates; d_hat omitted";
    }
    if (!fit.dropped.empty()) {
        side["zero_estimates_at_n"] = fit.dropped;
    }
    if (opt.mode == SimulateMode::conditional) {
        side["kept_trials"] = std::move(kept);
    }
    if (opt.mode == SimulateMode::decomposition) {
        side["identity_holds"] = identity_ok;
    }
    return out;
}

SeriesOutput oracle(const Scenario& sc, const OracleOptions& opt) {
    if (opt.n_max < 1) {
        throw input_error("--n-max", "must be positive");
    }
    auto ga = enumerate_glps(sc);
    auto am = build_alphabet(ga, sc.density);
    const std::size_t ell = opt.ell ? *opt.ell : minimal_sequence_length(sc);
    std::ostringstream csv;
    csv << "n,upper,lower,exponent_upper,exponent_lower\r\n";
    const std::size_t fit_from = std::max<std::size_t>(1, (opt.n_max + 1) / 2);
    std::vector<std::pair<std::size_t, double>> upper_fit;
    std::vector<std::pair<std::size_t, double>> lower_fit;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t n = 1; n <= opt.n_max; ++n) {
        double log_upper = exact_union_log_probability(am, n, 0);
        double log_lower = ell <= n ? exact_union_log_probability(am, n - ell, static_cast<long long>(ell))
                                    : nan;
        const double dn = static_cast<double>(n);
        csv << n << ',' << format_number(std::exp(log_upper)) << ','
            << (std::isnan(log_lower) ? std::string() : format_number(std::exp(log_lower))) << ','
            << csv_number(-log_upper / dn) << ',' << csv_number(-log_lower / dn) << "\r\n";
        if (n >= fit_from) {
            upper_fit.emplace_back(n, log_upper);
            if (!std::isnan(log_lower)) {
                lower_fit.emplace_back(n, log_lower);
            }
        }
    }
    SeriesOutput out;
    out.csv = csv.str();
    Json& side = out.sidecar;
    side["ell"] = ell;
    side["fit_n_min"] = fit_from;
    side["fit_n_max"] = opt.n_max;
    auto fu = fit_exponent_log(upper_fit);
    auto fl = fit_exponent_log(lower_fit);
    if (fu.d_hat) {
        side["d_hat_upper"] = *fu.d_hat;
    }
    if (fl.d_hat) {
        side["d_hat_lower"] = *fl.d_hat;
    }
    if (!fu.d_hat && !fl.d_hat) {
        side["note"] = "no positive probabilities in the fit range; slopes omitted";
    }
    return out;
}

int run_analyze(const std::string& scenario_path, const std::string& out_path, std::ostream& err) {
    return guarded(err, [&] {
        auto out = analyze(load_scenario(scenario_path));
        write_text(out_path, dump_json(out.report));
        for (const auto& w : out.warnings) {
            err << "warning: " << w << '\n';
        }
        return out.warnings.empty() ? exit_ok : exit_assumption;
    });
}

int run_simulate(const std::string& scenario_path, const std::string& out_path, const SimulateOptions& opt,
                 std::ostream& err) {
    return guarded(err, [&] {
        auto out = simulate(load_scenario(scenario_path), opt);
        write_text(out_path, out.csv);
        write_text(out_path + ".json", dump_json(out.sidecar));
        return exit_ok;
    });
}

int run_oracle(const std::string& scenario_path, const std::string& out_path, const OracleOptions& opt,
               std::ostream& err) {
    return guarded(err, [&] {
        auto out = oracle(load_scenario(scenario_path), opt);
        write_text(out_path, out.csv);
        write_text(out_path + ".json", dump_json(out.sidecar));
        return exit_ok;
    });
}

}  // namespace explab
