#pragma once

// Backend-neutral LP/MIP models and a built-in solver: bounded revised simplex
// (primal with Bland fallback, dual for warm starts), best-first branch and
// bound, exhaustive enumeration for tiny models, and MPS file exchange.

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace trsp::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kFeasTol = 1e-6;
inline constexpr double kOptTol = 1e-7;

enum class VarType { continuous, binary };
enum class Sense { le, ge, eq };
enum class Status { optimal, infeasible, unbounded, time_limit };

const char* to_string(Status s);

struct Variable {
  std::string name;
  double lower = 0.0;
  double upper = kInf;
  double cost = 0.0;
  VarType type = VarType::continuous;
};

using Terms = std::vector<std::pair<int, double>>;

struct Constraint {
  std::string name;
  Terms terms;
  Sense sense = Sense::le;
  double rhs = 0.0;
};

/// Minimization model. Immutable once handed to a solver.
class LinearModel {
 public:
  int add_variable(Variable v);
  int add_continuous(std::string name, double lower, double upper, double cost);
  int add_binary(std::string name, double cost);
  int add_constraint(std::string name, Terms terms, Sense sense, double rhs);

  const std::vector<Variable>& variables() const { return vars_; }
  const std::vector<Constraint>& constraints() const { return rows_; }
  std::vector<Variable>& mutable_variables() { return vars_; }
  int num_variables() const { return static_cast<int>(vars_.size()); }
  int num_constraints() const { return static_cast<int>(rows_.size()); }
  int num_binaries() const;

  /// Throws InputError on duplicate names, bad bounds or dangling references.
  void validate() const;

  double objective_value(const std::vector<double>& values) const;
  double row_activity(int row, const std::vector<double>& values) const;

  /// Name of the first row, bound or integrality requirement violated by more
  /// than `tol`, or nullopt when `values` is feasible.
  std::optional<std::string> first_violation(const std::vector<double>& values,
                                             double tol = kFeasTol) const;

 private:
  std::vector<Variable> vars_;
  std::vector<Constraint> rows_;
};

struct LpSolution {
  Status status = Status::infeasible;
  std::vector<double> primal;
  std::vector<double> duals;          // one per constraint, c_j - y^T a_j = d_j
  std::vector<double> reduced_costs;  // one per variable
  double objective = 0.0;
  double dual_objective = 0.0;  // y^T b plus reduced-cost terms of variables at bounds
  std::int64_t iterations = 0;
};

struct MipSolution {
  Status status = Status::infeasible;
  std::vector<double> values;
  double objective = kInf;
  double bound = -kInf;
  double gap = kInf;  // (objective - bound) / max(1, |objective|)
  std::int64_t nodes = 0;
  // Bound after each processed node; nondecreasing.
  std::vector<double> bound_trace;
};

LpSolution solve_lp(const LinearModel& model, double time_limit_seconds = kInf);

struct MipOptions {
  double time_limit_seconds = kInf;
  double gap_tolerance = 0.0;
  std::int64_t node_limit = std::numeric_limits<std::int64_t>::max();
  // Known feasible point, used as the starting incumbent when feasible.
  std::optional<std::vector<double>> incumbent;
};

MipSolution solve_mip(const LinearModel& model, const MipOptions& options = {});

/// Exhaustive optimum over all binary assignments; continuous variables are
/// optimized by LP for each assignment.
MipSolution enumerate_tiny(const LinearModel& model, int max_binaries = 22);

/// Fixed-format MPS with names mangled to at most 8 characters. The mangling
/// table is written next to it as `<path>.names` (`<mangled> <original>`).
void export_mps(const LinearModel& model, const std::filesystem::path& path);

/// Mangled column/row names in the order used by export_mps.
std::vector<std::string> mangled_column_names(const LinearModel& model);
std::vector<std::string> mangled_row_names(const LinearModel& model);

/// Parses `<name> <value>` lines (mangled or original names) and validates
/// the point against every row and bound. Throws InputError naming the
/// violated row.
MipSolution read_external_solution(const LinearModel& model, const std::filesystem::path& path);

/// Runs `command_template` after replacing `{mps}` and `{sol}` with file paths
/// inside `workdir`, then reads the solution file.
MipSolution solve_external(const LinearModel& model, const std::string& command_template,
                           const std::filesystem::path& workdir);

}  // namespace trsp::lp
