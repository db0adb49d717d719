#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fdwfm/complex.hpp"
#include "fdwfm/core.hpp"
#include "fdwfm/expr.hpp"
#include "fdwfm/scalar.hpp"
#include "fdwfm/system.hpp"

namespace fdwfm {

enum class ProblemKind { RealScalar, ComplexScalar, System };

enum class Flag { PaperSignTypo, SourceUncertain, PaperValuesUnverifiable };

enum class MethodId { Secant, Newton, WFM, FDWFM, Broyden };

std::string_view to_string(ProblemKind k);
std::string_view to_string(Flag f);
std::string_view to_string(MethodId m);
std::optional<ProblemKind> parse_kind(std::string_view s);
std::optional<Flag> parse_flag(std::string_view s);
std::optional<MethodId> parse_method(std::string_view s);

/// Components of a point; real kinds keep zero imaginary parts.
using PointValue = std::vector<Complex>;

struct ReferenceMetric {
    std::optional<int> iterations;
    std::optional<double> coc;
    bool coc_not_defined = false;
    std::optional<int> nfe;
};

struct ProblemSpec {
    std::string id;
    ProblemKind kind = ProblemKind::RealScalar;
    std::vector<std::string> expressions;
    std::vector<std::string> variables;
    /// Scalar kinds only.
    std::optional<std::string> derivative;
    /// Systems only; row-major, n rows of n entries.
    std::vector<std::vector<std::string>> jacobian;
    /// x0 and, for scalar kinds, optionally x1.
    std::vector<PointValue> initial;
    std::optional<PointValue> expected_root;
    std::map<MethodId, ReferenceMetric> paper_metrics;
    std::set<Flag> flags;
    std::string comment;
    /// Line of the "problem" header in its source file, 0 if built in code.
    int line = 0;

    bool has(Flag f) const { return flags.count(f) != 0; }
    /// Table number from an id of the form "tableN/...", else 0.
    int table() const;
};

class FormatError : public std::runtime_error {
 public:
    FormatError(std::string source, int line, const std::string& message);
    int line() const noexcept { return line_; }

 private:
    int line_;
};

class ValidationError : public std::runtime_error {
 public:
    ValidationError(std::string problem_id, int line, std::string invariant);
    const std::string& problem_id() const noexcept { return id_; }
    const std::string& invariant() const noexcept { return invariant_; }
    int line() const noexcept { return line_; }

 private:
    std::string id_;
    int line_;
    std::string invariant_;
};

/// Problems with residual above this at the expected root fail validation.
inline constexpr double kRootResidualLimit = 1e-4;

/// Parses and validates the problem-file format (docs/problem-format.md).
std::vector<ProblemSpec> parse_problems(std::string_view text, const std::string& source_name = "<input>");
std::vector<ProblemSpec> load_problems(const std::string& path);

/// Serializes back to the problem-file format.
std::string format_problems(const std::vector<ProblemSpec>& problems);

std::vector<ProblemSpec> builtin_corpus();
std::vector<ProblemSpec> select_tables(const std::vector<ProblemSpec>& all, const std::vector<int>& tables);

/// Settings used by the benchmark tables: tighter residual tolerance and a
/// larger iteration cap than SolverConfig's defaults.
SolverConfig benchmark_config();

/// Expressions of a ProblemSpec parsed and ready to solve.
class CompiledProblem {
 public:
    explicit CompiledProblem(ProblemSpec spec);

    const ProblemSpec& spec() const noexcept { return spec_; }
    bool has_derivative() const noexcept { return derivative_.has_value() || !jacobian_.empty(); }

    /// Real-mode domain errors evaluate to NaN, so solvers see NonFiniteValue.
    ScalarProblem scalar() const;
    ComplexProblem complex() const;
    SystemProblem system() const;

    /// ||F(p)|| with real or complex evaluation according to kind.
    double residual(const PointValue& p) const;

    const std::vector<expr::Expr>& equations() const noexcept { return equations_; }

 private:
    ProblemSpec spec_;
    std::vector<expr::Expr> equations_;
    std::optional<expr::Expr> derivative_;
    std::vector<std::vector<expr::Expr>> jacobian_;
};

struct MethodResult {
    MethodId method = MethodId::FDWFM;
    bool applicable = true;
    Status status = Status::MaxIterExceeded;
    int iterations = 0;
    long nfe = 0;
    long derivative_evals = 0;
    std::optional<double> coc;
    PointValue root;
    double residual = 0.0;
    std::string detail;
};

struct ComparisonRow {
    ProblemSpec problem;
    std::vector<MethodResult> results;
};

struct ComparisonReport {
    SolverConfig config;
    std::vector<MethodId> methods;
    std::vector<ComparisonRow> rows;
};

/// Runs one method on one problem; failures become statuses.
MethodResult run_method(const CompiledProblem& problem, MethodId method, const SolverConfig& config);

/// Runs every method on every problem. jobs <= 0 uses the hardware
/// concurrency. Rows come back in input order.
ComparisonReport run_comparison(const std::vector<ProblemSpec>& problems, const std::vector<MethodId>& methods,
                                const SolverConfig& config, int jobs = 0);

enum class ReportFormat { Csv, Json, Markdown };

std::optional<ReportFormat> parse_format(std::string_view s);

std::string render_report(const ComparisonReport& report, ReportFormat format);

/// Reads the JSON rendering back.
ComparisonReport report_from_json(std::string_view text);

/// Text forms used in reports and problem files.
std::string format_point(const PointValue& p, ProblemKind kind);
std::string format_real(double v);
std::string format_complex(Complex z);
std::optional<Complex> parse_complex(std::string_view s);

}  // namespace fdwfm
