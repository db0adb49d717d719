#include <cmath>
#include <cstdio>

#include <json.hpp>

#include "fdwfm/coc.hpp"
#include "fdwfm/corpus.hpp"

namespace fdwfm {

using json = nlohmann::ordered_json;

std::optional<ReportFormat> parse_format(std::string_view s) {
    if (s == "csv") return ReportFormat::Csv;
    if (s == "json") return ReportFormat::Json;
    if (s == "markdown" || s == "md") return ReportFormat::Markdown;
    return std::nullopt;
}

namespace {

constexpr int kSchemaVersion = 1;

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

std::string config_line(const SolverConfig& c) {
    return "residual_tol=" + format_real(c.residual_tol) + " step_tol=" + format_real(c.step_tol) +
           " max_iter=" + std::to_string(c.max_iter) + " denom_guard=" + format_real(c.denom_guard) +
           " a0=" + std::string(to_string(c.jacobian_init)) + " on_singular=" + std::string(to_string(c.on_singular)) +
           " count_formal=" + (c.count_formal ? "true" : "false") +
           " fallback_to_secant=" + (c.fallback_to_secant ? "true" : "false") +
           " literal_step1=" + (c.literal_step1 ? "true" : "false");
}

std::string component_list(const PointValue& p, ProblemKind kind) {
    // semicolons keep vector components apart inside a single CSV cell
    if (kind == ProblemKind::ComplexScalar) return format_point(p, kind);
    std::vector<std::string> parts;
    for (const auto& c : p) parts.push_back(format_real(c.real()));
    return join(parts, ";");
}

// ---- csv ----

std::string csv_cell(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string render_csv(const ComparisonReport& report) {
    std::vector<std::string> header = {"id", "kind", "function", "x0", "x1", "expected_root"};
    for (auto m : report.methods)
        for (const char* col : {"_status", "_iterations", "_coc", "_nfe", "_root"})
            header.push_back(std::string(to_string(m)) + col);
    std::string out = join(header, ",") + "\r\n";
    for (const auto& row : report.rows) {
        const ProblemSpec& p = row.problem;
        std::vector<std::string> cells = {
            p.id,
            std::string(to_string(p.kind)),
            join(p.expressions, "; "),
            p.initial.empty() ? "" : component_list(p.initial[0], p.kind),
            p.initial.size() > 1 ? component_list(p.initial[1], p.kind) : "",
            p.expected_root ? component_list(*p.expected_root, p.kind) : "",
        };
        for (const auto& r : row.results) {
            if (!r.applicable) {
                cells.insert(cells.end(), {"NotApplicable", "", "", "", ""});
                continue;
            }
            cells.push_back(std::string(to_string(r.status)));
            cells.push_back(std::to_string(r.iterations));
            cells.push_back(r.coc ? format_real(*r.coc) : "ND");
            cells.push_back(std::to_string(r.nfe));
            cells.push_back(component_list(r.root, p.kind));
        }
        for (auto& c : cells) c = csv_cell(c);
        out += join(cells, ",") + "\r\n";
    }
    return out;
}

// ---- markdown ----

std::string short_real(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string short_point(const PointValue& p, ProblemKind kind) {
    std::vector<std::string> parts;
    for (const auto& c : p) {
        if (kind != ProblemKind::ComplexScalar) {
            parts.push_back(short_real(c.real()));
        } else {
            std::string s = short_real(c.real()) + (std::signbit(c.imag()) ? "-" : "+") + short_real(std::abs(c.imag())) + "i";
            parts.push_back(s);
        }
    }
    return parts.size() == 1 ? parts[0] : "(" + join(parts, ", ") + ")";
}

std::string md_cell(std::string s) {
    std::string out;
    for (char c : s) {
        if (c == '|') out += '\\';
        out += c;
    }
    return out;
}

std::string render_markdown(const ComparisonReport& report) {
    std::string out = "Solver config: `" + config_line(report.config) + "`\n\n";
    out += "COC: last three steps before the final iterate, root proxy = final iterate, ND when not defined.\n\n";
    std::vector<std::string> header = {"Id", "Function", "X0", "X1"};
    std::vector<std::string> names;
    for (auto m : report.methods) names.emplace_back(to_string(m));
    for (const char* col : {"i", "COC", "NFE", "Root"})
        for (const auto& n : names) header.push_back(std::string(col) + " " + n);
    out += "| " + join(header, " | ") + " |\n";
    out += "|";
    for (std::size_t i = 0; i < header.size(); ++i) out += "---|";
    out += "\n";
    for (const auto& row : report.rows) {
        const ProblemSpec& p = row.problem;
        std::vector<std::string> cells = {
            p.id,
            join(p.expressions, "; "),
            p.initial.empty() ? "" : short_point(p.initial[0], p.kind),
            p.initial.size() > 1 ? short_point(p.initial[1], p.kind) : "",
        };
        std::vector<std::string> iters, cocs, nfes, roots;
        for (const auto& r : row.results) {
            if (!r.applicable) {
                for (auto* v : {&iters, &cocs, &nfes, &roots}) v->push_back("n/a");
                continue;
            }
            std::string i = std::to_string(r.iterations);
            if (r.status != Status::Converged) i += " (" + std::string(to_string(r.status)) + ")";
            iters.push_back(i);
            if (r.coc) {
                char buf[32];
                std::snprintf(buf, sizeof buf, "%.5f", *r.coc);
                cocs.push_back(buf);
            } else {
                cocs.push_back("ND");
            }
            nfes.push_back(std::to_string(r.nfe));
            roots.push_back(short_point(r.root, p.kind));
        }
        for (auto* v : {&iters, &cocs, &nfes, &roots}) cells.insert(cells.end(), v->begin(), v->end());
        for (auto& c : cells) c = md_cell(c);
        out += "| " + join(cells, " | ") + " |\n";
    }
    return out;
}

// ---- json ----

json point_json(const PointValue& p, ProblemKind kind) {
    json a = json::array();
    for (const auto& c : p) {
        if (kind == ProblemKind::ComplexScalar) a.push_back(json::array({c.real(), c.imag()}));
        else a.push_back(c.real());
    }
    return a;
}

PointValue point_from_json(const json& a, ProblemKind kind) {
    PointValue p;
    for (const auto& c : a) {
        if (kind == ProblemKind::ComplexScalar) p.emplace_back(c.at(0).get<double>(), c.at(1).get<double>());
        else p.emplace_back(c.get<double>(), 0.0);
    }
    return p;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json config_json(const SolverConfig& c) {
    return {{"residual_tol", c.residual_tol},
            {"step_tol", c.step_tol},
            {"max_iter", c.max_iter},
            {"denom_guard", c.denom_guard},
            {"jacobian_init", std::string(to_string(c.jacobian_init))},
            {"on_singular", std::string(to_string(c.on_singular))},
            {"count_formal", c.count_formal},
            {"fallback_to_secant", c.fallback_to_secant},
            {"literal_step1", c.literal_step1}};
}

std::string render_json(const ComparisonReport& report) {
    json doc;
    doc["schema"] = "fdwfm-report";
    doc["version"] = kSchemaVersion;
    doc["config"] = config_json(report.config);
    doc["coc_convention"] = {{"window", "x[N-4], x[N-3], x[N-2] of an N-iterate trace"},
                             {"root_proxy", "final iterate"},
                             {"noise_floor_ulps", kCocNoiseUlps},
                             {"not_defined", "window touches a starting point, errors not strictly decreasing, "
                                             "or an error is within the noise floor"}};
    json methods = json::array();
    for (auto m : report.methods) methods.push_back(std::string(to_string(m)));
    doc["methods"] = methods;
    json rows = json::array();
    for (const auto& row : report.rows) {
        const ProblemSpec& p = row.problem;
        json r;
        r["id"] = p.id;
        r["kind"] = std::string(to_string(p.kind));
        r["variables"] = p.variables;
        r["expressions"] = p.expressions;
        r["derivative"] = p.derivative ? json(*p.derivative) : json(nullptr);
        r["jacobian"] = p.jacobian;
        json initial = json::array();
        for (const auto& x : p.initial) initial.push_back(point_json(x, p.kind));
        r["initial"] = initial;
        r["expected_root"] = p.expected_root ? point_json(*p.expected_root, p.kind) : json(nullptr);
        json flags = json::array();
        for (auto f : p.flags) flags.push_back(std::string(to_string(f)));
        r["flags"] = flags;
        json paper = json::object();
        for (const auto& [m, metric] : p.paper_metrics) {
            json e = json::object();
            e["iterations"] = metric.iterations ? json(*metric.iterations) : json(nullptr);
            e["coc"] = metric.coc_not_defined ? json("ND") : metric.coc ? json(*metric.coc) : json(nullptr);
            e["nfe"] = metric.nfe ? json(*metric.nfe) : json(nullptr);
            paper[std::string(to_string(m))] = e;
        }
        r["paper_metrics"] = paper;
        json results = json::array();
        for (const auto& m : row.results) {
            json e;
            e["method"] = std::string(to_string(m.method));
            e["applicable"] = m.applicable;
            if (m.applicable) {
                e["status"] = std::string(to_string(m.status));
                e["iterations"] = m.iterations;
                e["nfe"] = m.nfe;
                e["derivative_evals"] = m.derivative_evals;
                e["coc"] = m.coc ? json(*m.coc) : json(nullptr);
                e["root"] = point_json(m.root, p.kind);
                e["residual"] = number_or_null(m.residual);
            } else {
                e["status"] = "NotApplicable";
            }
            e["detail"] = m.detail;
            results.push_back(e);
        }
        r["results"] = results;
        rows.push_back(r);
    }
    doc["rows"] = rows;
    return doc.dump(2) + "\n";
}

template <class E, class Parse>
E enum_field(const json& j, Parse parse, const char* what) {
    std::string s = j.get<std::string>();
    auto v = parse(s);
    if (!v) throw std::runtime_error(std::string("report: unknown ") + what + " '" + s + "'");
    return *v;
}

std::optional<Status> parse_status(std::string_view s) {
    for (auto st : {Status::Converged, Status::MaxIterExceeded, Status::DegenerateDenominator, Status::SingularMatrix,
                    Status::NonFiniteValue})
        if (to_string(st) == s) return st;
    return std::nullopt;
}

}  // namespace

std::string render_report(const ComparisonReport& report, ReportFormat format) {
    switch (format) {
        case ReportFormat::Csv: return render_csv(report);
        case ReportFormat::Json: return render_json(report);
        case ReportFormat::Markdown: return render_markdown(report);
    }
    return {};
}

ComparisonReport report_from_json(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("report: ") + e.what());
    }
    try {
        if (doc.at("schema") != "fdwfm-report") throw std::runtime_error("report: not an fdwfm report");
        if (doc.at("version").get<int>() != kSchemaVersion) throw std::runtime_error("report: unsupported version");
        ComparisonReport report;
        const json& c = doc.at("config");
        report.config.residual_tol = c.at("residual_tol").get<double>();
        report.config.step_tol = c.at("step_tol").get<double>();
        report.config.max_iter = c.at("max_iter").get<int>();
        report.config.denom_guard = c.at("denom_guard").get<double>();
        report.config.jacobian_init =
            c.at("jacobian_init") == "identity" ? JacobianInit::Identity : JacobianInit::FiniteDifference;
        report.config.on_singular = c.at("on_singular") == "reinit" ? SingularPolicy::ReinitJacobian : SingularPolicy::Fail;
        report.config.count_formal = c.at("count_formal").get<bool>();
        report.config.fallback_to_secant = c.at("fallback_to_secant").get<bool>();
        report.config.literal_step1 = c.at("literal_step1").get<bool>();
        for (const auto& m : doc.at("methods")) report.methods.push_back(enum_field<MethodId>(m, parse_method, "method"));

        for (const auto& r : doc.at("rows")) {
            ComparisonRow row;
            ProblemSpec& p = row.problem;
            p.id = r.at("id").get<std::string>();
            p.kind = enum_field<ProblemKind>(r.at("kind"), parse_kind, "kind");
            p.variables = r.at("variables").get<std::vector<std::string>>();
            p.expressions = r.at("expressions").get<std::vector<std::string>>();
            if (!r.at("derivative").is_null()) p.derivative = r.at("derivative").get<std::string>();
            p.jacobian = r.at("jacobian").get<std::vector<std::vector<std::string>>>();
            for (const auto& x : r.at("initial")) p.initial.push_back(point_from_json(x, p.kind));
            if (!r.at("expected_root").is_null()) p.expected_root = point_from_json(r.at("expected_root"), p.kind);
            for (const auto& f : r.at("flags")) p.flags.insert(enum_field<Flag>(f, parse_flag, "flag"));
            for (const auto& [name, e] : r.at("paper_metrics").items()) {
                ReferenceMetric metric;
                if (!e.at("iterations").is_null()) metric.iterations = e.at("iterations").get<int>();
                if (e.at("coc").is_string()) metric.coc_not_defined = true;
                else if (!e.at("coc").is_null()) metric.coc = e.at("coc").get<double>();
                if (!e.at("nfe").is_null()) metric.nfe = e.at("nfe").get<int>();
                p.paper_metrics[enum_field<MethodId>(json(name), parse_method, "method")] = metric;
            }
            for (const auto& e : r.at("results")) {
                MethodResult m;
                m.method = enum_field<MethodId>(e.at("method"), parse_method, "method");
                m.applicable = e.at("applicable").get<bool>();
                m.detail = e.at("detail").get<std::string>();
                if (m.applicable) {
                    m.status = enum_field<Status>(e.at("status"), parse_status, "status");
                    m.iterations = e.at("iterations").get<int>();
                    m.nfe = e.at("nfe").get<long>();
                    m.derivative_evals = e.at("derivative_evals").get<long>();
                    if (!e.at("coc").is_null()) m.coc = e.at("coc").get<double>();
                    m.root = point_from_json(e.at("root"), p.kind);
                    m.residual = e.at("residual").is_null() ? std::numeric_limits<double>::infinity()
                                                            : e.at("residual").get<double>();
                }
                row.results.push_back(std::move(m));
            }
            report.rows.push_back(std::move(row));
        }
        return report;
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("report: ") + e.what());
    }
}

}  // namespace fdwfm
