#ifndef EHRELAY_LP_HPP
#define EHRELAY_LP_HPP

#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace ehrelay::lp {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();
inline constexpr double kFeasibilityTolerance = 1e-9;
inline constexpr long kMaxPivots = 1'000'000;

enum class Sense { less_equal, greater_equal, equal };

struct Row {
  std::vector<double> coeffs;  ///< dense, one entry per variable
  Sense sense = Sense::less_equal;
  double rhs = 0.0;
};

/// Dense linear program with per-variable bounds. Lower bounds may be
/// -infinity and upper bounds +infinity; everything else must be finite.
struct Problem {
  int n_vars = 0;
  std::vector<Row> rows;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<double> objective;  ///< empty means "feasibility only"

  explicit Problem(int n = 0)
      : n_vars(n), lower(n, 0.0), upper(n, kInfinity) {}

  Row& add_row(Sense sense, double rhs) {
    rows.push_back({std::vector<double>(n_vars, 0.0), sense, rhs});
    return rows.back();
  }
};

/// Throws std::invalid_argument on malformed problems.
void check(const Problem& p);

/// Largest violation over rows and bounds. Each row is measured after
/// dividing by its largest absolute coefficient.
double max_violation(const Problem& p, std::span<const double> x);

struct Feasibility {
  bool feasible = false;
  std::vector<double> witness;  ///< set when feasible
};

/// Phase-1 simplex with Bland's rule. Throws SolverStall past kMaxPivots.
Feasibility feasible(const Problem& p);

enum class Status { optimal, infeasible, unbounded };

struct Solution {
  Status status = Status::infeasible;
  double value = 0.0;
  std::vector<double> point;
};

/// Two-phase simplex minimizing p.objective (zero objective when empty).
Solution minimize(const Problem& p);

/// Plain-text dump: header, bounds, optional objective, then one line per row.
void write(std::ostream& out, const Problem& p);
Problem read(std::istream& in);

std::string to_string(Sense s);

}  // namespace ehrelay::lp

#endif  // EHRELAY_LP_HPP
