#pragma once

// Dense two-phase tableau simplex with Bland's rule.
//
// Problems are stated as
//   maximize  c'x   subject to  A_i x (<=|>=|=) b_i,   lower <= x <= upper
// Finite bounds are handled by substitution (x = l + y or x = u - y), with an
// extra <= row for a doubly bounded variable. Variables with lower == upper are
// substituted out before the tableau is built.

#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace copier::lp {

enum class Sense { less_equal, greater_equal, equal };
enum class Status { optimal, infeasible, unbounded };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::optimal: return "optimal";
    case Status::infeasible: return "infeasible";
    case Status::unbounded: return "unbounded";
  }
  return "?";
}

template <typename Scalar>
struct Problem {
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  Vec objective;  ///< maximized
  Mat constraints;
  std::vector<Sense> senses;
  Vec rhs;
  Vec lower;
  Vec upper;

  Eigen::Index num_variables() const { return objective.size(); }
  Eigen::Index num_constraints() const { return constraints.rows(); }

  /// Problem over `n` variables bounded to [0, +inf) with no rows yet.
  static Problem with_variables(Eigen::Index n) {
    Problem p;
    p.objective = Vec::Zero(n);
    p.constraints = Mat::Zero(0, n);
    p.rhs = Vec::Zero(0);
    p.lower = Vec::Zero(n);
    p.upper = Vec::Constant(n, std::numeric_limits<Scalar>::infinity());
    return p;
  }

  void add_constraint(const Vec& row, Sense sense, Scalar b) {
    if (row.size() != num_variables()) throw std::invalid_argument("constraint width mismatch");
    constraints.conservativeResize(constraints.rows() + 1, Eigen::NoChange);
    constraints.row(constraints.rows() - 1) = row.transpose();
    rhs.conservativeResize(rhs.size() + 1);
    rhs[rhs.size() - 1] = b;
    senses.push_back(sense);
  }

  void validate() const {
    const auto n = num_variables();
    if (constraints.cols() != n && constraints.rows() > 0)
      throw std::invalid_argument("constraint matrix width does not match objective");
    if (rhs.size() != constraints.rows() || static_cast<Eigen::Index>(senses.size()) != constraints.rows())
      throw std::invalid_argument("rhs/senses size does not match constraint rows");
    if (lower.size() != n || upper.size() != n)
      throw std::invalid_argument("bound vectors do not match variable count");
    if (!objective.allFinite() || !constraints.allFinite() || !rhs.allFinite())
      throw std::invalid_argument("non-finite coefficient");
    for (Eigen::Index j = 0; j < n; ++j) {
      if (std::isnan(lower[j]) || std::isnan(upper[j]) || lower[j] > upper[j])
        throw std::invalid_argument("variable " + std::to_string(j) + " has lower > upper");
      if (lower[j] == std::numeric_limits<Scalar>::infinity() ||
          upper[j] == -std::numeric_limits<Scalar>::infinity())
        throw std::invalid_argument("variable " + std::to_string(j) + " has an empty domain");
    }
  }
};

template <typename Scalar>
struct Solution {
  Status status = Status::infeasible;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> x;
  Scalar objective = 0;
  int pivots = 0;
};

struct Options {
  double pivot_tolerance = 1e-9;
  double feasibility_tolerance = 1e-9;
  int max_pivots = 200000;
};

/// Largest violation of any row or bound at `x`; 0 when feasible.
template <typename Scalar>
Scalar max_violation(const Problem<Scalar>& p, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& x) {
  Scalar worst = 0;
  for (Eigen::Index i = 0; i < p.num_constraints(); ++i) {
    const Scalar lhs = p.constraints.row(i).dot(x);
    Scalar v = 0;
    switch (p.senses[i]) {
      case Sense::less_equal: v = lhs - p.rhs[i]; break;
      case Sense::greater_equal: v = p.rhs[i] - lhs; break;
      case Sense::equal: v = std::abs(lhs - p.rhs[i]); break;
    }
    worst = std::max(worst, v);
  }
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    worst = std::max(worst, p.lower[j] - x[j]);
    worst = std::max(worst, x[j] - p.upper[j]);
  }
  return worst;
}

namespace detail {

// How an original variable is expressed in the standardized nonnegative columns.
enum class VarKind { fixed, shifted, reflected, split };

struct VarMap {
  VarKind kind;
  double offset;  // l for shifted, u for reflected, value for fixed
  int col;        // first standardized column
};

template <typename Scalar>
class Tableau {
 public:
  using Table = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  Tableau(Table t, std::vector<int> basis, int first_artificial, const Options& opt)
      : t_(std::move(t)), basis_(std::move(basis)), first_artificial_(first_artificial), opt_(opt) {}

  int rows() const { return static_cast<int>(t_.rows()) - 1; }
  int rhs_col() const { return static_cast<int>(t_.cols()) - 1; }

  /// Installs a maximization objective over the columns and prices out the basis.
  void set_objective(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& cost) {
    auto obj = t_.row(rows());
    obj.setZero();
    obj.head(cost.size()) = cost.transpose();
    for (int i = 0; i < rows(); ++i) {
      const Scalar cb = obj[basis_[i]];
      if (cb != 0) obj -= cb * t_.row(i);
    }
  }

  /// Runs Bland-rule pivots over columns [0, entering_limit). Returns false if unbounded.
  bool optimize(int entering_limit, int& pivots) {
    const Scalar tol = static_cast<Scalar>(opt_.pivot_tolerance);
    for (;;) {
      int enter = -1;
      for (int j = 0; j < entering_limit; ++j) {
        if (t_(rows(), j) > tol) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return true;
      int leave = -1;
      Scalar best = 0;
      for (int i = 0; i < rows(); ++i) {
        const Scalar a = t_(i, enter);
        if (a <= tol) continue;
        const Scalar ratio = t_(i, rhs_col()) / a;
        if (leave < 0 || ratio < best - Scalar(1e-12) ||
            (ratio <= best + Scalar(1e-12) && basis_[i] < basis_[leave])) {
          leave = i;
          best = ratio;
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
      if (++pivots > opt_.max_pivots) throw std::runtime_error("simplex pivot limit exceeded");
    }
  }

  void pivot(int r, int e) {
    t_.row(r) /= t_(r, e);
    for (int i = 0; i <= rows(); ++i) {
      if (i == r) continue;
      const Scalar f = t_(i, e);
      if (f != 0) t_.row(i) -= f * t_.row(r);
    }
    basis_[r] = e;
  }

  /// Pivots basic artificials out where a structural column allows it.
  void expel_artificials() {
    const Scalar tol = static_cast<Scalar>(opt_.pivot_tolerance);
    for (int i = 0; i < rows(); ++i) {
      if (basis_[i] < first_artificial_) continue;
      for (int j = 0; j < first_artificial_; ++j) {
        if (std::abs(t_(i, j)) > tol) {
          pivot(i, j);
          break;
        }
      }
    }
  }

  Scalar objective_value() const { return -t_(rows(), rhs_col()); }

  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> column_values(int ncols) const {
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> v = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(ncols);
    for (int i = 0; i < rows(); ++i)
      if (basis_[i] < ncols) v[basis_[i]] = std::max(Scalar(0), t_(i, rhs_col()));
    return v;
  }

 private:
  Table t_;
  std::vector<int> basis_;
  int first_artificial_;
  Options opt_;
};

}  // namespace detail

/// Solves `p` to an optimal basic solution, or reports infeasible/unbounded.
/// Deterministic: the same input always follows the same pivot sequence.
template <typename Scalar>
Solution<Scalar> solve_lp(const Problem<Scalar>& p, const Options& opt = {}) {
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  p.validate();
  const Eigen::Index n = p.num_variables();
  const Scalar inf = std::numeric_limits<Scalar>::infinity();

  // Standardize variables.
  std::vector<detail::VarMap> vars(n);
  int ny = 0;
  struct BoundRow { int col; Scalar width; };
  std::vector<BoundRow> bound_rows;
  for (Eigen::Index j = 0; j < n; ++j) {
    const Scalar l = p.lower[j], u = p.upper[j];
    if (l == u) {
      vars[j] = {detail::VarKind::fixed, static_cast<double>(l), -1};
    } else if (l > -inf) {
      vars[j] = {detail::VarKind::shifted, static_cast<double>(l), ny};
      if (u < inf) bound_rows.push_back({ny, u - l});
      ny += 1;
    } else if (u < inf) {
      vars[j] = {detail::VarKind::reflected, static_cast<double>(u), ny};
      ny += 1;
    } else {
      vars[j] = {detail::VarKind::split, 0.0, ny};
      ny += 2;
    }
  }

  // Rows over standardized columns: coefficients, sense, rhs.
  struct Row { Vec a; Sense sense; Scalar b; };
  std::vector<Row> rows;
  const Scalar ftol = static_cast<Scalar>(opt.feasibility_tolerance);
  auto push_row = [&](Vec a, Sense s, Scalar b) -> bool {
    if (a.size() == 0 || a.cwiseAbs().maxCoeff() == 0) {
      // Constant row: keep nothing, but check it.
      switch (s) {
        case Sense::less_equal: return 0 <= b + ftol;
        case Sense::greater_equal: return 0 >= b - ftol;
        case Sense::equal: return std::abs(b) <= ftol;
      }
    }
    // Flip to b >= 0; a >= row with b == 0 becomes a <= row so it needs no artificial.
    if (b < 0 || (b == 0 && s == Sense::greater_equal)) {
      a = -a;
      b = -b;
      if (s == Sense::less_equal) s = Sense::greater_equal;
      else if (s == Sense::greater_equal) s = Sense::less_equal;
    }
    rows.push_back({std::move(a), s, b});
    return true;
  };

  Solution<Scalar> out;
  bool consistent = true;
  for (Eigen::Index i = 0; i < p.num_constraints(); ++i) {
    Vec a = Vec::Zero(ny);
    Scalar b = p.rhs[i];
    for (Eigen::Index j = 0; j < n; ++j) {
      const Scalar coef = p.constraints(i, j);
      if (coef == 0) continue;
      const auto& v = vars[j];
      switch (v.kind) {
        case detail::VarKind::fixed: b -= coef * static_cast<Scalar>(v.offset); break;
        case detail::VarKind::shifted:
          b -= coef * static_cast<Scalar>(v.offset);
          a[v.col] += coef;
          break;
        case detail::VarKind::reflected:
          b -= coef * static_cast<Scalar>(v.offset);
          a[v.col] -= coef;
          break;
        case detail::VarKind::split:
          a[v.col] += coef;
          a[v.col + 1] -= coef;
          break;
      }
    }
    consistent = push_row(std::move(a), p.senses[i], b) && consistent;
  }
  for (const auto& br : bound_rows) {
    Vec a = Vec::Zero(ny);
    a[br.col] = 1;
    push_row(std::move(a), Sense::less_equal, br.width);
  }

  auto recover = [&](const Vec& y) {
    Vec x(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto& v = vars[j];
      switch (v.kind) {
        case detail::VarKind::fixed: x[j] = static_cast<Scalar>(v.offset); break;
        case detail::VarKind::shifted: x[j] = static_cast<Scalar>(v.offset) + y[v.col]; break;
        case detail::VarKind::reflected: x[j] = static_cast<Scalar>(v.offset) - y[v.col]; break;
        case detail::VarKind::split: x[j] = y[v.col] - y[v.col + 1]; break;
      }
    }
    return x;
  };

  if (!consistent) {
    out.status = Status::infeasible;
    return out;
  }

  // Column layout: structural | slack or surplus | artificial | rhs.
  const int m = static_cast<int>(rows.size());
  int n_slack = 0, n_art = 0;
  for (const auto& r : rows) {
    if (r.sense != Sense::equal) ++n_slack;
    if (r.sense != Sense::less_equal) ++n_art;
  }
  const int first_slack = ny;
  const int first_art = ny + n_slack;
  const int ncols = first_art + n_art;
  typename detail::Tableau<Scalar>::Table t =
      detail::Tableau<Scalar>::Table::Zero(m + 1, ncols + 1);
  std::vector<int> basis(m);
  int s = first_slack, a = first_art;
  for (int i = 0; i < m; ++i) {
    const auto& r = rows[i];
    if (ny > 0) t.row(i).head(ny) = r.a.transpose();
    t(i, ncols) = r.b;
    switch (r.sense) {
      case Sense::less_equal:
        t(i, s) = 1;
        basis[i] = s++;
        break;
      case Sense::greater_equal:
        t(i, s++) = -1;
        t(i, a) = 1;
        basis[i] = a++;
        break;
      case Sense::equal:
        t(i, a) = 1;
        basis[i] = a++;
        break;
    }
  }

  detail::Tableau<Scalar> tab(std::move(t), std::move(basis), first_art, opt);

  if (n_art > 0) {
    Vec phase1 = Vec::Zero(ncols);
    phase1.tail(n_art).setConstant(-1);
    tab.set_objective(phase1);
    tab.optimize(ncols, out.pivots);
    if (tab.objective_value() < -ftol * std::max<Scalar>(1, static_cast<Scalar>(m))) {
      out.status = Status::infeasible;
      return out;
    }
    tab.expel_artificials();
  }

  Vec cost = Vec::Zero(ncols);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto& v = vars[j];
    switch (v.kind) {
      case detail::VarKind::fixed: break;
      case detail::VarKind::shifted: cost[v.col] += p.objective[j]; break;
      case detail::VarKind::reflected: cost[v.col] -= p.objective[j]; break;
      case detail::VarKind::split:
        cost[v.col] += p.objective[j];
        cost[v.col + 1] -= p.objective[j];
        break;
    }
  }
  tab.set_objective(cost);
  if (!tab.optimize(first_art, out.pivots)) {
    out.status = Status::unbounded;
    return out;
  }
  const Vec y = tab.column_values(ny);
  out.x = recover(y);
  out.objective = p.objective.dot(out.x);
  out.status = Status::optimal;
  return out;
}

/// Debug dump: objective line, one constraint per line, then a bounds section.
template <typename Scalar>
void write_lp(std::ostream& os, const Problem<Scalar>& p) {
  auto num = [](Scalar v) {
    if (std::isinf(static_cast<double>(v))) return std::string(v > 0 ? "inf" : "-inf");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", static_cast<double>(v));
    return std::string(buf);
  };
  os << "maximize";
  for (Eigen::Index j = 0; j < p.num_variables(); ++j) os << ' ' << num(p.objective[j]);
  os << '\n';
  for (Eigen::Index i = 0; i < p.num_constraints(); ++i) {
    os << "c" << i << ':';
    for (Eigen::Index j = 0; j < p.num_variables(); ++j) os << ' ' << num(p.constraints(i, j));
    switch (p.senses[i]) {
      case Sense::less_equal: os << " <= "; break;
      case Sense::greater_equal: os << " >= "; break;
      case Sense::equal: os << " = "; break;
    }
    os << num(p.rhs[i]) << '\n';
  }
  os << "bounds\n";
  for (Eigen::Index j = 0; j < p.num_variables(); ++j)
    os << 'x' << j << ' ' << num(p.lower[j]) << ' ' << num(p.upper[j]) << '\n';
}

using ProblemD = Problem<double>;
using SolutionD = Solution<double>;

}  // namespace copier::lp
