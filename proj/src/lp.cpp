#include "ehrelay/lp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>

#include "ehrelay/error.hpp"

namespace ehrelay::lp {

namespace {

constexpr double kPivotTolerance = 1e-11;
constexpr double kReducedCostTolerance = 1e-11;
constexpr double kRatioTieTolerance = 1e-12;

using Tableau = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// How an original variable maps onto nonnegative internal columns.
struct VarMap {
  enum class Kind { shifted, mirrored, split } kind = Kind::shifted;
  double offset = 0.0;  // lower bound (shifted) or upper bound (mirrored)
  int column = 0;       // first internal column
};

Sense flip(Sense s) {
  switch (s) {
    case Sense::less_equal: return Sense::greater_equal;
    case Sense::greater_equal: return Sense::less_equal;
    case Sense::equal: return Sense::equal;
  }
  return s;
}

bool satisfied(double lhs, Sense s, double rhs, double tol) {
  switch (s) {
    case Sense::less_equal: return lhs <= rhs + tol;
    case Sense::greater_equal: return lhs >= rhs - tol;
    case Sense::equal: return std::abs(lhs - rhs) <= tol;
  }
  return false;
}

// Dense two-phase simplex over nonnegative internal columns. The last
// tableau row holds reduced costs; the last column holds right-hand sides.
class Simplex {
 public:
  explicit Simplex(const Problem& p) : problem_(p) { build(); }

  bool trivially_infeasible() const { return trivially_infeasible_; }

  bool phase_one() {
    if (trivially_infeasible_) return false;
    if (n_artificial_ > 0) {
      set_costs(phase_one_costs());
      if (iterate(/*allow_artificial=*/true) != Status::optimal) {
        throw std::logic_error("phase one cannot be unbounded");
      }
      if (-tab_(m_, n_) > kFeasibilityTolerance) return false;
      drive_out_artificials();
    }
    return true;
  }

  Status phase_two(const std::vector<double>& objective) {
    set_costs(internal_costs(objective));
    return iterate(/*allow_artificial=*/false);
  }

  std::vector<double> point() const {
    std::vector<double> y(n_, 0.0);
    for (int i = 0; i < m_; ++i) y[basis_[i]] = std::max(0.0, tab_(i, n_));
    std::vector<double> x(problem_.n_vars, 0.0);
    for (int j = 0; j < problem_.n_vars; ++j) {
      const VarMap& v = vars_[j];
      switch (v.kind) {
        case VarMap::Kind::shifted: x[j] = v.offset + y[v.column]; break;
        case VarMap::Kind::mirrored: x[j] = v.offset - y[v.column]; break;
        case VarMap::Kind::split: x[j] = y[v.column] - y[v.column + 1]; break;
      }
    }
    return x;
  }

 private:
  void build() {
    const int nv = problem_.n_vars;
    vars_.resize(nv);
    int col = 0;
    for (int j = 0; j < nv; ++j) {
      const double lo = problem_.lower[j];
      const double hi = problem_.upper[j];
      if (std::isfinite(lo)) {
        vars_[j] = {VarMap::Kind::shifted, lo, col++};
      } else if (std::isfinite(hi)) {
        vars_[j] = {VarMap::Kind::mirrored, hi, col++};
      } else {
        vars_[j] = {VarMap::Kind::split, 0.0, col};
        col += 2;
      }
    }
    n_struct_ = col;

    // Internal rows: original rows, then finite upper bounds of shifted vars.
    struct InternalRow {
      std::vector<double> a;
      Sense sense;
      double b;
    };
    std::vector<InternalRow> rows;
    rows.reserve(problem_.rows.size() + nv);
    for (const Row& r : problem_.rows) {
      InternalRow ir{std::vector<double>(n_struct_, 0.0), r.sense, r.rhs};
      for (int j = 0; j < nv; ++j) {
        const double a = r.coeffs[j];
        if (a == 0.0) continue;
        const VarMap& v = vars_[j];
        switch (v.kind) {
          case VarMap::Kind::shifted:
            ir.a[v.column] += a;
            ir.b -= a * v.offset;
            break;
          case VarMap::Kind::mirrored:
            ir.a[v.column] -= a;
            ir.b -= a * v.offset;
            break;
          case VarMap::Kind::split:
            ir.a[v.column] += a;
            ir.a[v.column + 1] -= a;
            break;
        }
      }
      rows.push_back(std::move(ir));
    }
    for (int j = 0; j < nv; ++j) {
      const VarMap& v = vars_[j];
      if (v.kind == VarMap::Kind::shifted && std::isfinite(problem_.upper[j])) {
        InternalRow ir{std::vector<double>(n_struct_, 0.0), Sense::less_equal,
                       problem_.upper[j] - problem_.lower[j]};
        ir.a[v.column] = 1.0;
        rows.push_back(std::move(ir));
      }
    }

    // Normalize each row by its largest coefficient and make rhs >= 0.
    std::vector<InternalRow> kept;
    kept.reserve(rows.size());
    for (auto& r : rows) {
      double scale = 0.0;
      for (double a : r.a) scale = std::max(scale, std::abs(a));
      if (scale == 0.0) {
        if (!satisfied(0.0, r.sense, r.b, kFeasibilityTolerance)) trivially_infeasible_ = true;
        continue;
      }
      for (double& a : r.a) a /= scale;
      r.b /= scale;
      if (r.b < 0.0) {
        for (double& a : r.a) a = -a;
        r.b = -r.b;
        r.sense = flip(r.sense);
      }
      kept.push_back(std::move(r));
    }

    m_ = static_cast<int>(kept.size());
    int n_slack = 0;
    for (const auto& r : kept) {
      if (r.sense != Sense::equal) ++n_slack;
      if (r.sense != Sense::less_equal) ++n_artificial_;
    }
    first_artificial_ = n_struct_ + n_slack;
    n_ = first_artificial_ + n_artificial_;
    tab_ = Tableau::Zero(m_ + 1, n_ + 1);
    basis_.assign(m_, -1);

    int slack = n_struct_;
    int art = first_artificial_;
    for (int i = 0; i < m_; ++i) {
      const auto& r = kept[i];
      for (int j = 0; j < n_struct_; ++j) tab_(i, j) = r.a[j];
      tab_(i, n_) = r.b;
      switch (r.sense) {
        case Sense::less_equal:
          tab_(i, slack) = 1.0;
          basis_[i] = slack++;
          break;
        case Sense::greater_equal:
          tab_(i, slack++) = -1.0;
          tab_(i, art) = 1.0;
          basis_[i] = art++;
          break;
        case Sense::equal:
          tab_(i, art) = 1.0;
          basis_[i] = art++;
          break;
      }
    }
  }

  std::vector<double> phase_one_costs() const {
    std::vector<double> c(n_, 0.0);
    for (int j = first_artificial_; j < n_; ++j) c[j] = 1.0;
    return c;
  }

  std::vector<double> internal_costs(const std::vector<double>& objective) const {
    std::vector<double> c(n_, 0.0);
    if (objective.empty()) return c;
    for (int j = 0; j < problem_.n_vars; ++j) {
      const VarMap& v = vars_[j];
      switch (v.kind) {
        case VarMap::Kind::shifted: c[v.column] += objective[j]; break;
        case VarMap::Kind::mirrored: c[v.column] -= objective[j]; break;
        case VarMap::Kind::split:
          c[v.column] += objective[j];
          c[v.column + 1] -= objective[j];
          break;
      }
    }
    return c;
  }

  // Reduced costs r = c - c_B B^-1 A and objective -c_B B^-1 b.
  void set_costs(const std::vector<double>& c) {
    tab_.row(m_).setZero();
    for (int j = 0; j < n_; ++j) tab_(m_, j) = c[j];
    for (int i = 0; i < m_; ++i) {
      const double cb = c[basis_[i]];
      if (cb != 0.0) tab_.row(m_) -= cb * tab_.row(i);
    }
  }

  Status iterate(bool allow_artificial) {
    const int limit = allow_artificial ? n_ : first_artificial_;
    while (true) {
      int enter = -1;
      for (int j = 0; j < limit; ++j) {
        if (tab_(m_, j) < -kReducedCostTolerance) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return Status::optimal;

      int leave = -1;
      double best = 0.0;
      for (int i = 0; i < m_; ++i) {
        const double a = tab_(i, enter);
        if (a <= kPivotTolerance) continue;
        const double ratio = tab_(i, n_) / a;
        if (leave < 0 || ratio < best - kRatioTieTolerance * (1.0 + std::abs(best))) {
          leave = i;
          best = ratio;
        } else if (ratio <= best + kRatioTieTolerance * (1.0 + std::abs(best)) &&
                   basis_[i] < basis_[leave]) {
          leave = i;
          best = std::min(best, ratio);
        }
      }
      if (leave < 0) return Status::unbounded;
      pivot(leave, enter);
    }
  }

  void pivot(int row, int col) {
    if (++pivots_ > kMaxPivots) throw SolverStall("solver stall: pivot limit exceeded");
    tab_.row(row) /= tab_(row, col);
    tab_(row, col) = 1.0;
    for (int i = 0; i <= m_; ++i) {
      if (i == row) continue;
      const double f = tab_(i, col);
      if (f == 0.0) continue;
      tab_.row(i) -= f * tab_.row(row);
      tab_(i, col) = 0.0;
    }
    basis_[row] = col;
  }

  void drive_out_artificials() {
    for (int i = 0; i < m_; ++i) {
      if (basis_[i] < first_artificial_) continue;
      for (int j = 0; j < first_artificial_; ++j) {
        if (std::abs(tab_(i, j)) > 1e-9) {
          pivot(i, j);
          break;
        }
      }
      // Otherwise the row is redundant; its artificial stays basic at zero.
    }
  }

  const Problem& problem_;
  std::vector<VarMap> vars_;
  int n_struct_ = 0;
  int first_artificial_ = 0;
  int n_artificial_ = 0;
  int m_ = 0;
  int n_ = 0;
  long pivots_ = 0;
  bool trivially_infeasible_ = false;
  Tableau tab_;
  std::vector<int> basis_;
};

void verify_witness(const Problem& p, const std::vector<double>& x) {
  const double v = max_violation(p, x);
  if (v > kFeasibilityTolerance) {
    std::ostringstream msg;
    msg << "simplex witness violates constraints by " << v;
    throw Error(msg.str());
  }
}

}  // namespace

void check(const Problem& p) {
  if (p.n_vars < 0) throw std::invalid_argument("negative variable count");
  if (static_cast<int>(p.lower.size()) != p.n_vars || static_cast<int>(p.upper.size()) != p.n_vars) {
    throw std::invalid_argument("bounds must have one entry per variable");
  }
  if (!p.objective.empty() && static_cast<int>(p.objective.size()) != p.n_vars) {
    throw std::invalid_argument("objective must have one entry per variable");
  }
  for (int j = 0; j < p.n_vars; ++j) {
    if (std::isnan(p.lower[j]) || std::isnan(p.upper[j]) || p.lower[j] == kInfinity ||
        p.upper[j] == -kInfinity) {
      throw std::invalid_argument("invalid variable bounds");
    }
  }
  for (const Row& r : p.rows) {
    if (static_cast<int>(r.coeffs.size()) != p.n_vars) {
      throw std::invalid_argument("row width does not match variable count");
    }
    if (!std::isfinite(r.rhs)) throw std::invalid_argument("row rhs must be finite");
    for (double a : r.coeffs) {
      if (!std::isfinite(a)) throw std::invalid_argument("row coefficients must be finite");
    }
  }
}

double max_violation(const Problem& p, std::span<const double> x) {
  double worst = 0.0;
  for (int j = 0; j < p.n_vars; ++j) {
    worst = std::max(worst, p.lower[j] - x[j]);
    worst = std::max(worst, x[j] - p.upper[j]);
  }
  for (const Row& r : p.rows) {
    double scale = 0.0;
    double lhs = 0.0;
    for (int j = 0; j < p.n_vars; ++j) {
      scale = std::max(scale, std::abs(r.coeffs[j]));
      lhs += r.coeffs[j] * x[j];
    }
    if (scale == 0.0) scale = 1.0;
    const double gap = (lhs - r.rhs) / scale;
    switch (r.sense) {
      case Sense::less_equal: worst = std::max(worst, gap); break;
      case Sense::greater_equal: worst = std::max(worst, -gap); break;
      case Sense::equal: worst = std::max(worst, std::abs(gap)); break;
    }
  }
  return worst;
}

Feasibility feasible(const Problem& p) {
  check(p);
  for (int j = 0; j < p.n_vars; ++j) {
    if (p.lower[j] > p.upper[j]) return {};
  }
  Simplex simplex(p);
  if (!simplex.phase_one()) return {};
  Feasibility result{true, simplex.point()};
  verify_witness(p, result.witness);
  return result;
}

Solution minimize(const Problem& p) {
  check(p);
  for (int j = 0; j < p.n_vars; ++j) {
    if (p.lower[j] > p.upper[j]) return {};
  }
  Simplex simplex(p);
  if (!simplex.phase_one()) return {};
  Solution s;
  s.status = simplex.phase_two(p.objective);
  if (s.status != Status::optimal) return s;
  s.point = simplex.point();
  verify_witness(p, s.point);
  for (int j = 0; j < p.n_vars && !p.objective.empty(); ++j) s.value += p.objective[j] * s.point[j];
  return s;
}

std::string to_string(Sense s) {
  switch (s) {
    case Sense::less_equal: return "<=";
    case Sense::greater_equal: return ">=";
    case Sense::equal: return "=";
  }
  return "?";
}

namespace {

std::string format_number(double v) {
  if (v == kInfinity) return "inf";
  if (v == -kInfinity) return "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_number(const std::string& token) {
  if (token == "inf") return kInfinity;
  if (token == "-inf") return -kInfinity;
  std::size_t used = 0;
  const double v = std::stod(token, &used);
  if (used != token.size()) throw std::invalid_argument("bad number '" + token + "'");
  return v;
}

Sense parse_sense(const std::string& token) {
  if (token == "<=") return Sense::less_equal;
  if (token == ">=") return Sense::greater_equal;
  if (token == "=") return Sense::equal;
  throw std::invalid_argument("bad row sense '" + token + "'");
}

}  // namespace

// Format:
//   lp <n_vars> <n_rows>
//   bound <lo> <hi>                  (n_vars lines)
//   objective <c_1> ... <c_n>        (optional)
//   row <sense> <rhs> <a_1> ... <a_n>  (n_rows lines)
void write(std::ostream& out, const Problem& p) {
  out << "lp " << p.n_vars << ' ' << p.rows.size() << '\n';
  for (int j = 0; j < p.n_vars; ++j) {
    out << "bound " << format_number(p.lower[j]) << ' ' << format_number(p.upper[j]) << '\n';
  }
  if (!p.objective.empty()) {
    out << "objective";
    for (double c : p.objective) out << ' ' << format_number(c);
    out << '\n';
  }
  for (const Row& r : p.rows) {
    out << "row " << to_string(r.sense) << ' ' << format_number(r.rhs);
    for (double a : r.coeffs) out << ' ' << format_number(a);
    out << '\n';
  }
}

Problem read(std::istream& in) {
  std::string tag;
  int n_vars = 0;
  std::size_t n_rows = 0;
  if (!(in >> tag >> n_vars >> n_rows) || tag != "lp" || n_vars < 0) {
    throw std::invalid_argument("missing lp header");
  }
  Problem p(n_vars);
  std::string a;
  std::string b;
  for (int j = 0; j < n_vars; ++j) {
    if (!(in >> tag >> a >> b) || tag != "bound") throw std::invalid_argument("missing bound line");
    p.lower[j] = parse_number(a);
    p.upper[j] = parse_number(b);
  }
  std::size_t rows_read = 0;
  while (in >> tag) {
    if (tag == "objective") {
      p.objective.resize(n_vars);
      for (int j = 0; j < n_vars; ++j) {
        if (!(in >> a)) throw std::invalid_argument("truncated objective");
        p.objective[j] = parse_number(a);
      }
    } else if (tag == "row") {
      if (!(in >> a >> b)) throw std::invalid_argument("truncated row");
      Row& r = p.add_row(parse_sense(a), parse_number(b));
      for (int j = 0; j < n_vars; ++j) {
        if (!(in >> a)) throw std::invalid_argument("truncated row");
        r.coeffs[j] = parse_number(a);
      }
      ++rows_read;
    } else {
      throw std::invalid_argument("unknown line tag '" + tag + "'");
    }
  }
  if (rows_read != n_rows) throw std::invalid_argument("row count does not match header");
  check(p);
  return p;
}

}  // namespace ehrelay::lp
