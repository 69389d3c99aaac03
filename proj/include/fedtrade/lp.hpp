// Copyright 2026 The fedtrade Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

/// \file
/// Small dense linear programs: a model builder, a two-phase revised
/// simplex solver reporting primal and dual values, an LP-format dump and an
/// exhaustive integer oracle.
///
/// Models are always maximizations over x >= 0 with optional finite upper
/// bounds. Dual signs follow the max convention: a <= row has a
/// nonnegative multiplier, a >= row a nonpositive one, and at optimality
/// sum_r b_r y_r + sum_j ub_j u_j equals the primal objective.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fedtrade::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Relation { kLe, kEq, kGe };

struct Row {
  std::vector<std::pair<std::size_t, double>> terms;
  Relation relation = Relation::kLe;
  double rhs = 0;
  std::string name;
};

class Model {
 public:
  std::size_t add_variable(double objective, double upper = kInf, bool integer = false,
                           std::string name = {}) {
    if (!std::isfinite(objective)) throw std::invalid_argument("lp: non-finite objective coefficient");
    if (!(upper >= 0)) throw std::invalid_argument("lp: upper bound must be nonnegative");
    objective_.push_back(objective);
    upper_.push_back(upper);
    integer_.push_back(integer);
    if (name.empty()) name = "x" + std::to_string(objective_.size());
    names_.push_back(std::move(name));
    return objective_.size() - 1;
  }

  std::size_t add_row(std::vector<std::pair<std::size_t, double>> terms, Relation rel, double rhs,
                      std::string name = {}) {
    if (!std::isfinite(rhs)) throw std::invalid_argument("lp: non-finite right-hand side");
    for (const auto& [j, a] : terms) {
      if (j >= num_vars()) throw std::invalid_argument("lp: row refers to unknown variable");
      if (!std::isfinite(a)) throw std::invalid_argument("lp: non-finite coefficient");
    }
    if (name.empty()) name = "r" + std::to_string(rows_.size() + 1);
    rows_.push_back({std::move(terms), rel, rhs, std::move(name)});
    return rows_.size() - 1;
  }

  void set_objective(std::size_t j, double c) { objective_.at(j) = c; }
  void set_upper(std::size_t j, double ub) { upper_.at(j) = ub; }
  void set_rhs(std::size_t r, double rhs) { rows_.at(r).rhs = rhs; }

  std::size_t num_vars() const noexcept { return objective_.size(); }
  std::size_t num_rows() const noexcept { return rows_.size(); }
  const std::vector<double>& objective() const noexcept { return objective_; }
  const std::vector<double>& upper() const noexcept { return upper_; }
  const std::vector<bool>& integer() const noexcept { return integer_; }
  const std::vector<std::string>& names() const noexcept { return names_; }
  const std::vector<Row>& rows() const noexcept { return rows_; }

  double evaluate(const std::vector<double>& x) const {
    double v = 0;
    for (std::size_t j = 0; j < num_vars(); ++j) v += objective_[j] * x[j];
    return v;
  }

  /// Largest violation of any row or bound by `x`.
  double primal_residual(const std::vector<double>& x) const {
    double worst = 0;
    for (std::size_t j = 0; j < num_vars(); ++j) {
      worst = std::max(worst, -x[j]);
      if (std::isfinite(upper_[j])) worst = std::max(worst, x[j] - upper_[j]);
    }
    for (const auto& r : rows_) {
      double act = 0;
      for (const auto& [j, a] : r.terms) act += a * x[j];
      switch (r.relation) {
        case Relation::kLe: worst = std::max(worst, act - r.rhs); break;
        case Relation::kGe: worst = std::max(worst, r.rhs - act); break;
        case Relation::kEq: worst = std::max(worst, std::abs(act - r.rhs)); break;
      }
    }
    return worst;
  }

 private:
  std::vector<double> objective_;
  std::vector<double> upper_;
  std::vector<bool> integer_;
  std::vector<std::string> names_;
  std::vector<Row> rows_;
};

enum class Status { kOptimal, kInfeasible, kUnbounded };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::kOptimal: return "optimal";
    case Status::kInfeasible: return "infeasible";
    case Status::kUnbounded: return "unbounded";
  }
  return "?";
}

struct Solution {
  Status status = Status::kInfeasible;
  double objective = 0;
  std::vector<double> x;
  std::vector<double> duals;        ///< one per model row
  std::vector<double> bound_duals;  ///< one per variable, 0 unless its upper bound binds
  long iterations = 0;

  bool optimal() const noexcept { return status == Status::kOptimal; }
};

struct SolverOptions {
  double pivot_tol = 1e-9;
  double optimality_tol = 1e-9;
  double feasibility_tol = 1e-7;
  int refactor_every = 50;
  int max_degenerate_steps = 50;  ///< consecutive, before switching to Bland's rule
  long max_iterations = 200000;
};

namespace detail {

/// Dense equality form with slacks and artificials, solved in two phases.
class Simplex {
 public:
  Simplex(const Model& model, const SolverOptions& opt) : model_(model), opt_(opt) { build(); }

  Solution run() {
    Solution sol;
    // Phase one: drive artificials to zero.
    std::vector<double> c1(ncols_, 0.0);
    for (std::size_t j = first_art_; j < ncols_; ++j) c1[j] = -1.0;
    const Status s1 = iterate(c1, /*allow_artificial=*/false, sol.iterations);
    if (s1 != Status::kOptimal) throw std::logic_error("lp: phase one cannot be unbounded");
    double infeas = 0;
    for (std::size_t r = 0; r < m_; ++r)
      if (basis_[r] >= first_art_) infeas += std::max(xb_[r], 0.0);
    double scale = 1;
    for (double b : b_) scale = std::max(scale, std::abs(b));
    if (infeas > opt_.feasibility_tol * scale) {
      sol.status = Status::kInfeasible;
      return sol;
    }
    evict_artificials();

    std::vector<double> c2(ncols_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) c2[j] = model_.objective()[j];
    const Status s2 = iterate(c2, false, sol.iterations);
    if (s2 == Status::kUnbounded) {
      sol.status = Status::kUnbounded;
      return sol;
    }
    refactor();
    sol.status = Status::kOptimal;
    sol.x.assign(n_, 0.0);
    for (std::size_t r = 0; r < m_; ++r)
      if (basis_[r] < n_) sol.x[basis_[r]] = std::max(xb_[r], 0.0);
    sol.objective = model_.evaluate(sol.x);
    const std::vector<double> y = prices(c2);
    sol.duals.assign(model_.num_rows(), 0.0);
    sol.bound_duals.assign(n_, 0.0);
    for (std::size_t r = 0; r < m_; ++r) {
      const double v = y[r] * sign_[r];
      if (origin_[r] >= 0)
        sol.duals[static_cast<std::size_t>(origin_[r])] = v;
      else
        sol.bound_duals[static_cast<std::size_t>(-origin_[r] - 1)] = v;
    }
    return sol;
  }

 private:
  double& a(std::size_t r, std::size_t j) { return A_[r * ncols_ + j]; }
  double a(std::size_t r, std::size_t j) const { return A_[r * ncols_ + j]; }

  static bool implied_bound(const Model& m, std::size_t j) {
    const double ub = m.upper()[j];
    for (const auto& row : m.rows()) {
      if (row.relation == Relation::kGe || row.rhs < 0) continue;
      double aj = 0;
      bool nonneg = true;
      for (const auto& [k, c] : row.terms) {
        if (c < 0) nonneg = false;
        if (k == j) aj += c;
      }
      if (nonneg && aj > 0 && row.rhs / aj <= ub) return true;
    }
    return false;
  }

  void build() {
    n_ = model_.num_vars();
    struct StdRow {
      std::vector<std::pair<std::size_t, double>> terms;
      Relation rel;
      double rhs;
      int origin;
    };
    std::vector<StdRow> rows;
    for (std::size_t r = 0; r < model_.num_rows(); ++r) {
      const auto& row = model_.rows()[r];
      rows.push_back({row.terms, row.relation, row.rhs, static_cast<int>(r)});
    }
    for (std::size_t j = 0; j < n_; ++j)
      if (std::isfinite(model_.upper()[j]) && !implied_bound(model_, j))
        rows.push_back({{{j, 1.0}}, Relation::kLe, model_.upper()[j], -static_cast<int>(j) - 1});

    m_ = rows.size();
    std::size_t slacks = 0;
    for (const auto& r : rows) if (r.rel != Relation::kEq) ++slacks;
    // Artificials only where the slack cannot start basic.
    sign_.assign(m_, 1.0);
    std::size_t arts = 0;
    for (std::size_t r = 0; r < m_; ++r) {
      Relation rel = rows[r].rel;
      if (rows[r].rhs < 0) {
        sign_[r] = -1.0;
        if (rel == Relation::kLe) rel = Relation::kGe;
        else if (rel == Relation::kGe) rel = Relation::kLe;
      }
      rows[r].rel = rel;
      if (rel != Relation::kLe) ++arts;
    }
    first_slack_ = n_;
    first_art_ = n_ + slacks;
    ncols_ = first_art_ + arts;
    A_.assign(m_ * ncols_, 0.0);
    b_.assign(m_, 0.0);
    origin_.assign(m_, 0);
    basis_.assign(m_, 0);
    std::size_t s = first_slack_, art = first_art_;
    for (std::size_t r = 0; r < m_; ++r) {
      for (const auto& [j, c] : rows[r].terms) a(r, j) += sign_[r] * c;
      b_[r] = sign_[r] * rows[r].rhs;
      origin_[r] = rows[r].origin;
      if (rows[r].rel == Relation::kLe) {
        a(r, s) = 1.0;
        basis_[r] = s++;
      } else {
        if (rows[r].rel == Relation::kGe) a(r, s++) = -1.0;
        a(r, art) = 1.0;
        basis_[r] = art++;
      }
    }
    in_basis_.assign(ncols_, false);
    for (std::size_t r = 0; r < m_; ++r) in_basis_[basis_[r]] = true;
    refactor();
  }

  void refactor() {
    // Gauss-Jordan inversion of the basis matrix with partial pivoting.
    std::vector<double> B(m_ * m_);
    for (std::size_t r = 0; r < m_; ++r)
      for (std::size_t c = 0; c < m_; ++c) B[r * m_ + c] = a(r, basis_[c]);
    Binv_.assign(m_ * m_, 0.0);
    for (std::size_t r = 0; r < m_; ++r) Binv_[r * m_ + r] = 1.0;
    for (std::size_t c = 0; c < m_; ++c) {
      std::size_t p = c;
      for (std::size_t r = c + 1; r < m_; ++r)
        if (std::abs(B[r * m_ + c]) > std::abs(B[p * m_ + c])) p = r;
      const double piv = B[p * m_ + c];
      if (std::abs(piv) < 1e-13) throw std::runtime_error("lp: singular basis");
      if (p != c)
        for (std::size_t k = 0; k < m_; ++k) {
          std::swap(B[p * m_ + k], B[c * m_ + k]);
          std::swap(Binv_[p * m_ + k], Binv_[c * m_ + k]);
        }
      for (std::size_t k = 0; k < m_; ++k) {
        B[c * m_ + k] /= piv;
        Binv_[c * m_ + k] /= piv;
      }
      for (std::size_t r = 0; r < m_; ++r) {
        if (r == c) continue;
        const double f = B[r * m_ + c];
        if (f == 0) continue;
        for (std::size_t k = 0; k < m_; ++k) {
          B[r * m_ + k] -= f * B[c * m_ + k];
          Binv_[r * m_ + k] -= f * Binv_[c * m_ + k];
        }
      }
    }
    xb_.assign(m_, 0.0);
    for (std::size_t r = 0; r < m_; ++r) {
      double v = 0;
      for (std::size_t k = 0; k < m_; ++k) v += Binv_[r * m_ + k] * b_[k];
      xb_[r] = std::abs(v) < 1e-13 ? 0.0 : v;
    }
  }

  std::vector<double> prices(const std::vector<double>& c) const {
    std::vector<double> y(m_, 0.0);
    for (std::size_t r = 0; r < m_; ++r) {
      const double cb = c[basis_[r]];
      if (cb == 0) continue;
      for (std::size_t k = 0; k < m_; ++k) y[k] += cb * Binv_[r * m_ + k];
    }
    return y;
  }

  std::vector<double> column(std::size_t j) const {
    std::vector<double> u(m_, 0.0);
    for (std::size_t k = 0; k < m_; ++k) {
      const double akj = a(k, j);
      if (akj == 0) continue;
      for (std::size_t r = 0; r < m_; ++r) u[r] += Binv_[r * m_ + k] * akj;
    }
    return u;
  }

  void pivot(std::size_t r, std::size_t j, const std::vector<double>& u) {
    const double t = xb_[r] / u[r];
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r) continue;
      xb_[i] -= t * u[i];
      if (std::abs(xb_[i]) < 1e-13) xb_[i] = 0;
    }
    xb_[r] = t;
    const double inv = 1.0 / u[r];
    for (std::size_t k = 0; k < m_; ++k) Binv_[r * m_ + k] *= inv;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r || u[i] == 0) continue;
      const double f = u[i];
      for (std::size_t k = 0; k < m_; ++k) Binv_[i * m_ + k] -= f * Binv_[r * m_ + k];
    }
    in_basis_[basis_[r]] = false;
    basis_[r] = j;
    in_basis_[j] = true;
  }

  Status iterate(const std::vector<double>& c, bool allow_artificial, long& iterations) {
    bool bland = false;
    int degenerate = 0;
    long local = 0;
    while (true) {
      if (++local > opt_.max_iterations) throw std::runtime_error("lp: iteration limit reached");
      if (local % opt_.refactor_every == 0) refactor();
      const std::vector<double> y = prices(c);
      std::size_t enter = ncols_;
      double best = opt_.optimality_tol;
      const std::size_t limit = allow_artificial ? ncols_ : first_art_;
      for (std::size_t j = 0; j < limit; ++j) {
        if (in_basis_[j]) continue;
        double d = c[j];
        for (std::size_t r = 0; r < m_; ++r) d -= y[r] * a(r, j);
        if (d > best) {
          enter = j;
          if (bland) break;
          best = d;
        }
      }
      if (enter == ncols_) return Status::kOptimal;
      const std::vector<double> u = column(enter);
      std::size_t leave = m_;
      double ratio = kInf;
      for (std::size_t r = 0; r < m_; ++r) {
        if (u[r] <= opt_.pivot_tol) continue;
        const double t = std::max(xb_[r], 0.0) / u[r];
        bool take = false;
        if (leave == m_ || t < ratio - 1e-12) {
          take = true;
        } else if (t <= ratio + 1e-12) {
          take = bland ? basis_[r] < basis_[leave]
                       : (u[r] > u[leave] || (u[r] == u[leave] && basis_[r] < basis_[leave]));
        }
        if (take) {
          leave = r;
          ratio = std::min(ratio, t);
        }
      }
      if (leave == m_) return Status::kUnbounded;
      xb_[leave] = std::max(xb_[leave], 0.0);
      if (ratio <= 1e-12) {
        if (++degenerate > opt_.max_degenerate_steps) bland = true;
      } else {
        degenerate = 0;
      }
      pivot(leave, enter, u);
      ++iterations;
    }
  }

  void evict_artificials() {
    for (std::size_t r = 0; r < m_; ++r) {
      if (basis_[r] < first_art_) continue;
      std::size_t best_j = ncols_;
      double best = 1e-7;
      for (std::size_t j = 0; j < first_art_; ++j) {
        if (in_basis_[j]) continue;
        double alpha = 0;
        for (std::size_t k = 0; k < m_; ++k) alpha += Binv_[r * m_ + k] * a(k, j);
        if (std::abs(alpha) > best) {
          best = std::abs(alpha);
          best_j = j;
        }
      }
      if (best_j == ncols_) continue;  // redundant row; artificial stays at zero
      xb_[r] = 0;
      pivot(r, best_j, column(best_j));
    }
  }

  const Model& model_;
  SolverOptions opt_;
  std::size_t n_ = 0, m_ = 0, ncols_ = 0, first_slack_ = 0, first_art_ = 0;
  std::vector<double> A_, b_, sign_, Binv_, xb_;
  std::vector<int> origin_;  ///< model row, or -(var+1) for an explicit bound row
  std::vector<std::size_t> basis_;
  std::vector<bool> in_basis_;
};

}  // namespace detail

inline Solution solve(const Model& model, const SolverOptions& options = {}) {
  if (model.num_vars() == 0) {
    Solution sol;
    sol.status = Status::kOptimal;
    sol.duals.assign(model.num_rows(), 0.0);
    for (const auto& r : model.rows()) {
      const bool ok = (r.relation == Relation::kLe && r.rhs >= -options.feasibility_tol) ||
                      (r.relation == Relation::kGe && r.rhs <= options.feasibility_tol) ||
                      (r.relation == Relation::kEq && std::abs(r.rhs) <= options.feasibility_tol);
      if (!ok) sol.status = Status::kInfeasible;
    }
    return sol;
  }
  return detail::Simplex(model, options).run();
}

/// Dual objective sum_r b_r y_r + sum_j ub_j u_j of a solved model.
inline double dual_objective(const Model& model, const Solution& sol) {
  double v = 0;
  for (std::size_t r = 0; r < model.num_rows(); ++r) v += model.rows()[r].rhs * sol.duals[r];
  for (std::size_t j = 0; j < model.num_vars(); ++j)
    if (sol.bound_duals[j] != 0) v += model.upper()[j] * sol.bound_duals[j];
  return v;
}

/// Largest reduced-cost or dual-sign violation of `sol`. Zero at a true optimum.
inline double dual_residual(const Model& model, const Solution& sol) {
  std::vector<double> reduced = model.objective();
  for (std::size_t r = 0; r < model.num_rows(); ++r)
    for (const auto& [j, a] : model.rows()[r].terms) reduced[j] -= a * sol.duals[r];
  double worst = 0;
  for (std::size_t j = 0; j < model.num_vars(); ++j) {
    reduced[j] -= sol.bound_duals[j];
    worst = std::max(worst, reduced[j]);
    if (sol.x[j] > 1e-9) worst = std::max(worst, std::abs(reduced[j]));
  }
  for (std::size_t r = 0; r < model.num_rows(); ++r) {
    const auto rel = model.rows()[r].relation;
    if (rel == Relation::kLe) worst = std::max(worst, -sol.duals[r]);
    if (rel == Relation::kGe) worst = std::max(worst, sol.duals[r]);
  }
  return worst;
}

inline void write_lp_text(std::ostream& os, const Model& model) {
  auto term = [&](bool first, double c, std::size_t j) {
    std::ostringstream t;
    if (c < 0) t << (first ? "-" : " - ");
    else if (!first) t << " + ";
    const double m = std::abs(c);
    if (m != 1) t << m << ' ';
    t << model.names()[j];
    return t.str();
  };
  os << "Maximize\n obj:";
  bool first = true;
  for (std::size_t j = 0; j < model.num_vars(); ++j) {
    if (model.objective()[j] == 0) continue;
    os << (first ? " " : "") << term(first, model.objective()[j], j);
    first = false;
  }
  if (first) os << " 0";
  os << "\nSubject To\n";
  for (const auto& r : model.rows()) {
    os << ' ' << r.name << ':';
    bool f = true;
    for (const auto& [j, c] : r.terms) {
      os << (f ? " " : "") << term(f, c, j);
      f = false;
    }
    if (f) os << " 0";
    os << (r.relation == Relation::kLe ? " <= " : r.relation == Relation::kGe ? " >= " : " = ")
       << r.rhs << '\n';
  }
  os << "Bounds\n";
  for (std::size_t j = 0; j < model.num_vars(); ++j) {
    if (std::isfinite(model.upper()[j]))
      os << " 0 <= " << model.names()[j] << " <= " << model.upper()[j] << '\n';
    else
      os << ' ' << model.names()[j] << " >= 0\n";
  }
  bool any_int = false;
  for (std::size_t j = 0; j < model.num_vars(); ++j)
    if (model.integer()[j]) {
      if (!any_int) os << "Generals\n";
      any_int = true;
      os << ' ' << model.names()[j] << '\n';
    }
  os << "End\n";
}

struct IntegerSolution {
  bool feasible = false;
  double objective = 0;
  std::vector<long> x;
};

/// Exhaustive search over all integer points of a model whose variables are
/// all integer with finite bounds. Ties go to the lexicographically
/// smallest point.
inline IntegerSolution brute_force_ip(const Model& model, std::uint64_t max_points = 1u << 24) {
  const std::size_t n = model.num_vars();
  double points = 1;
  std::vector<long> ub(n);
  for (std::size_t j = 0; j < n; ++j) {
    if (!model.integer()[j] || !std::isfinite(model.upper()[j]))
      throw std::invalid_argument("brute_force_ip: every variable must be integer and bounded");
    ub[j] = static_cast<long>(std::floor(model.upper()[j] + 1e-9));
    points *= static_cast<double>(ub[j] + 1);
  }
  if (points > static_cast<double>(max_points))
    throw std::length_error("brute_force_ip: search space of " + std::to_string(points) +
                            " points exceeds the cap");

  const std::size_t m = model.num_rows();
  std::vector<std::vector<double>> coef(m, std::vector<double>(n, 0.0));
  for (std::size_t r = 0; r < m; ++r)
    for (const auto& [j, c] : model.rows()[r].terms) coef[r][j] += c;
  // Suffix bounds on what variables j.. can still add to each row and to the objective.
  std::vector<std::vector<double>> lo(m, std::vector<double>(n + 1, 0.0)),
      hi(m, std::vector<double>(n + 1, 0.0));
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t j = n; j-- > 0;) {
      const double v = coef[r][j] * static_cast<double>(ub[j]);
      lo[r][j] = lo[r][j + 1] + std::min(0.0, v);
      hi[r][j] = hi[r][j + 1] + std::max(0.0, v);
    }
  std::vector<double> obj_hi(n + 1, 0.0);
  for (std::size_t j = n; j-- > 0;)
    obj_hi[j] = obj_hi[j + 1] + std::max(0.0, model.objective()[j] * static_cast<double>(ub[j]));

  constexpr double tol = 1e-9;
  IntegerSolution best;
  std::vector<long> x(n, 0);
  std::vector<double> act(m, 0.0);

  auto rows_ok = [&](std::size_t next) {
    for (std::size_t r = 0; r < m; ++r) {
      const auto& row = model.rows()[r];
      const double mn = act[r] + lo[r][next], mx = act[r] + hi[r][next];
      if (row.relation != Relation::kGe && mn > row.rhs + tol) return false;
      if (row.relation != Relation::kLe && mx < row.rhs - tol) return false;
    }
    return true;
  };

  auto dfs = [&](auto&& self, std::size_t j, double value) -> void {
    if (!rows_ok(j)) return;
    if (best.feasible && value + obj_hi[j] <= best.objective + tol) return;
    if (j == n) {
      best.feasible = true;
      best.objective = value;
      best.x = x;
      return;
    }
    for (long v = 0; v <= ub[j]; ++v) {
      x[j] = v;
      for (std::size_t r = 0; r < m; ++r) act[r] += coef[r][j] * static_cast<double>(v);
      self(self, j + 1, value + model.objective()[j] * static_cast<double>(v));
      for (std::size_t r = 0; r < m; ++r) act[r] -= coef[r][j] * static_cast<double>(v);
    }
    x[j] = 0;
  };
  dfs(dfs, 0, 0.0);
  return best;
}

}  // namespace fedtrade::lp
