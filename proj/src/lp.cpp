#include "trsp/lp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <memory>
#include <queue>
#include <set>
#include <sstream>

#include "trsp/core.hpp"

namespace trsp::lp {

const char* to_string(Status s) {
  switch (s) {
    case Status::optimal: return "optimal";
    case Status::infeasible: return "infeasible";
    case Status::unbounded: return "unbounded";
    case Status::time_limit: return "time_limit";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// LinearModel

int LinearModel::add_variable(Variable v) {
  vars_.push_back(std::move(v));
  return static_cast<int>(vars_.size()) - 1;
}

int LinearModel::add_continuous(std::string name, double lower, double upper, double cost) {
  return add_variable({std::move(name), lower, upper, cost, VarType::continuous});
}

int LinearModel::add_binary(std::string name, double cost) {
  return add_variable({std::move(name), 0.0, 1.0, cost, VarType::binary});
}

int LinearModel::add_constraint(std::string name, Terms terms, Sense sense, double rhs) {
  rows_.push_back({std::move(name), std::move(terms), sense, rhs});
  return static_cast<int>(rows_.size()) - 1;
}

int LinearModel::num_binaries() const {
  return static_cast<int>(std::count_if(vars_.begin(), vars_.end(), [](const Variable& v) {
    return v.type == VarType::binary;
  }));
}

void LinearModel::validate() const {
  std::set<std::string> names;
  for (const auto& v : vars_) {
    if (!names.insert(v.name).second) throw InputError("duplicate variable name '" + v.name + "'");
    if (std::isnan(v.lower) || std::isnan(v.upper) || v.lower > v.upper) {
      throw InputError("variable '" + v.name + "' has inconsistent bounds");
    }
    if (v.type == VarType::binary && (v.lower < 0.0 || v.upper > 1.0)) {
      throw InputError("binary variable '" + v.name + "' must have bounds within [0,1]");
    }
    if (!std::isfinite(v.cost)) throw InputError("variable '" + v.name + "' has non-finite cost");
  }
  names.clear();
  for (const auto& r : rows_) {
    if (!names.insert(r.name).second) throw InputError("duplicate constraint name '" + r.name + "'");
    if (!std::isfinite(r.rhs)) throw InputError("constraint '" + r.name + "' has non-finite rhs");
    for (const auto& [j, a] : r.terms) {
      if (j < 0 || j >= num_variables()) {
        throw InputError("constraint '" + r.name + "' references unknown variable");
      }
      if (!std::isfinite(a)) throw InputError("constraint '" + r.name + "' has non-finite coefficient");
    }
  }
}

double LinearModel::objective_value(const std::vector<double>& values) const {
  double total = 0.0;
  for (std::size_t j = 0; j < vars_.size(); ++j) total += vars_[j].cost * values[j];
  return total;
}

double LinearModel::row_activity(int row, const std::vector<double>& values) const {
  double total = 0.0;
  for (const auto& [j, a] : rows_[row].terms) total += a * values[j];
  return total;
}

std::optional<std::string> LinearModel::first_violation(const std::vector<double>& values,
                                                        double tol) const {
  if (values.size() != vars_.size()) return std::string("<dimension>");
  for (std::size_t j = 0; j < vars_.size(); ++j) {
    const auto& v = vars_[j];
    if (values[j] < v.lower - tol || values[j] > v.upper + tol) return v.name;
    if (v.type == VarType::binary && std::abs(values[j] - std::round(values[j])) > tol) {
      return v.name;
    }
  }
  for (int i = 0; i < num_constraints(); ++i) {
    const double act = row_activity(i, values);
    const auto& r = rows_[i];
    const double scale = tol * std::max(1.0, std::abs(r.rhs));
    const bool bad = (r.sense == Sense::le && act > r.rhs + scale) ||
                     (r.sense == Sense::ge && act < r.rhs - scale) ||
                     (r.sense == Sense::eq && std::abs(act - r.rhs) > scale);
    if (bad) return r.name;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Simplex engine

namespace {

using Clock = std::chrono::steady_clock;

class Deadline {
 public:
  explicit Deadline(double seconds) : start_(Clock::now()), seconds_(seconds) {}
  bool expired() const {
    return std::isfinite(seconds_) &&
           std::chrono::duration<double>(Clock::now() - start_).count() >= seconds_;
  }

 private:
  Clock::time_point start_;
  double seconds_;
};

enum class State : std::uint8_t { basic, lower, upper, zero };

struct Basis {
  std::vector<int> head;
  std::vector<State> state;
};

constexpr double kPivotTol = 1e-9;
constexpr int kRefactorEvery = 64;

// Columns: [0, n) structural, [n, n+m) slacks (+e_i), [n+m, n+2m) artificials
// (sign_i * e_i). Row i reads a_i x + s_i (+ art_i) = b_i.
class Simplex {
 public:
  explicit Simplex(const LinearModel& model)
      : m_(model.num_constraints()), n_(model.num_variables()), ncols_(n_ + 2 * m_) {
    cols_.resize(ncols_);
    for (int i = 0; i < m_; ++i) {
      const auto& row = model.constraints()[i];
      for (const auto& [j, a] : row.terms) {
        if (a != 0.0) cols_[j].push_back({i, a});
      }
      b_.push_back(row.rhs);
    }
    // merge duplicate entries
    for (int j = 0; j < n_; ++j) {
      auto& c = cols_[j];
      std::sort(c.begin(), c.end());
      std::vector<std::pair<int, double>> merged;
      for (const auto& e : c) {
        if (!merged.empty() && merged.back().first == e.first) {
          merged.back().second += e.second;
        } else {
          merged.push_back(e);
        }
      }
      c = std::move(merged);
    }
    lo_.assign(ncols_, 0.0);
    up_.assign(ncols_, 0.0);
    cost_.assign(ncols_, 0.0);
    for (int j = 0; j < n_; ++j) {
      const auto& v = model.variables()[j];
      lo_[j] = v.lower;
      up_[j] = v.upper;
      cost_[j] = v.cost;
    }
    model_lo_.assign(lo_.begin(), lo_.begin() + n_);
    model_up_.assign(up_.begin(), up_.begin() + n_);
    for (int i = 0; i < m_; ++i) {
      cols_[n_ + i] = {{i, 1.0}};
      const Sense s = model.constraints()[i].sense;
      lo_[n_ + i] = s == Sense::ge ? -kInf : 0.0;
      up_[n_ + i] = s == Sense::le ? kInf : 0.0;
      cols_[n_ + m_ + i] = {{i, 1.0}};
    }
    x_.assign(ncols_, 0.0);
    state_.assign(ncols_, State::lower);
    head_.assign(m_, -1);
    binv_.assign(static_cast<std::size_t>(m_) * m_, 0.0);
  }

  int rows() const { return m_; }

  void reset_bounds() {
    std::copy(model_lo_.begin(), model_lo_.end(), lo_.begin());
    std::copy(model_up_.begin(), model_up_.end(), up_.begin());
  }
  void set_bounds(int j, double lo, double up) {
    lo_[j] = lo;
    up_[j] = up;
  }

  Status solve_from_scratch(const Deadline& deadline) {
    for (int j = 0; j < n_ + m_; ++j) place_at_bound(j);
    std::vector<double> resid = b_;
    for (int j = 0; j < n_; ++j) {
      if (x_[j] == 0.0) continue;
      for (const auto& [i, a] : cols_[j]) resid[i] -= a * x_[j];
    }
    for (int i = 0; i < m_; ++i) {
      const int art = n_ + m_ + i;
      const double r = resid[i];
      const int slack = n_ + i;
      lo_[art] = 0.0;
      up_[art] = 0.0;
      state_[art] = State::lower;
      x_[art] = 0.0;
      if (r >= lo_[slack] && r <= up_[slack]) {
        head_[i] = slack;
        state_[slack] = State::basic;
        x_[slack] = r;
      } else {
        const double v = r < lo_[slack] ? lo_[slack] : up_[slack];
        state_[slack] = r < lo_[slack] ? State::lower : State::upper;
        x_[slack] = v;
        const double res = r - v;
        cols_[art] = {{i, res > 0 ? 1.0 : -1.0}};
        up_[art] = kInf;
        head_[i] = art;
        state_[art] = State::basic;
        x_[art] = std::abs(res);
      }
    }
    refactor();

    std::vector<double> phase1(ncols_, 0.0);
    bool need_phase1 = false;
    for (int i = 0; i < m_; ++i) {
      if (up_[n_ + m_ + i] > 0.0) {
        phase1[n_ + m_ + i] = 1.0;
        need_phase1 = true;
      }
    }
    if (need_phase1) {
      const Status s = primal(phase1, deadline);
      if (s == Status::time_limit) return s;
      double infeas = 0.0;
      for (int i = 0; i < m_; ++i) infeas += x_[n_ + m_ + i];
      double scale = 1.0;
      for (double v : b_) scale = std::max(scale, std::abs(v));
      if (infeas > kFeasTol * scale) return Status::infeasible;
      for (int i = 0; i < m_; ++i) {
        const int art = n_ + m_ + i;
        up_[art] = 0.0;
        if (state_[art] != State::basic) {
          state_[art] = State::lower;
          x_[art] = 0.0;
        }
      }
    }
    return primal(cost_, deadline);
  }

  // Warm start from a basis that was optimal for different bounds: dual
  // simplex to regain primal feasibility, then a primal clean-up pass.
  Status resolve(const Basis& basis, const Deadline& deadline) {
    head_ = basis.head;
    state_ = basis.state;
    for (int j = 0; j < ncols_; ++j) {
      if (state_[j] == State::basic) continue;
      if (state_[j] == State::lower && !std::isfinite(lo_[j])) state_[j] = State::upper;
      if (state_[j] == State::upper && !std::isfinite(up_[j])) state_[j] = State::lower;
      place_nonbasic(j);
    }
    if (!refactor()) return solve_from_scratch(deadline);
    const Status s = dual(deadline);
    if (s != Status::optimal) return s;
    return primal(cost_, deadline);
  }

  Basis basis() const { return {head_, state_}; }

  double value(int j) const { return x_[j]; }

  void extract(LpSolution& out) const {
    out.primal.assign(x_.begin(), x_.begin() + n_);
    const auto y = duals(cost_);
    out.duals = y;
    out.reduced_costs.resize(n_);
    for (int j = 0; j < n_; ++j) out.reduced_costs[j] = reduced_cost(cost_, y, j);
    out.objective = 0.0;
    for (int j = 0; j < n_; ++j) out.objective += cost_[j] * x_[j];
    double dobj = 0.0;
    for (int i = 0; i < m_; ++i) dobj += b_[i] * y[i];
    for (int j = 0; j < ncols_; ++j) {
      if (state_[j] != State::basic && x_[j] != 0.0) dobj += reduced_cost(cost_, y, j) * x_[j];
    }
    out.dual_objective = dobj;
    out.iterations = iterations_;
  }

  std::int64_t iterations() const { return iterations_; }

 private:
  void place_at_bound(int j) {
    if (std::isfinite(lo_[j])) {
      state_[j] = State::lower;
    } else if (std::isfinite(up_[j])) {
      state_[j] = State::upper;
    } else {
      state_[j] = State::zero;
    }
    place_nonbasic(j);
  }

  void place_nonbasic(int j) {
    switch (state_[j]) {
      case State::lower: x_[j] = lo_[j]; break;
      case State::upper: x_[j] = up_[j]; break;
      case State::zero: x_[j] = 0.0; break;
      case State::basic: break;
    }
  }

  double* binv_row(int i) { return binv_.data() + static_cast<std::size_t>(i) * m_; }
  const double* binv_row(int i) const { return binv_.data() + static_cast<std::size_t>(i) * m_; }

  // Dense Gauss-Jordan inverse of the basis, then basic values from scratch.
  bool refactor() {
    std::vector<double> mat(static_cast<std::size_t>(m_) * m_, 0.0);
    for (int k = 0; k < m_; ++k) {
      for (const auto& [i, a] : cols_[head_[k]]) mat[static_cast<std::size_t>(i) * m_ + k] = a;
    }
    // mat has rows = constraints, columns = basis positions; its inverse has
    // rows = basis positions.
    std::vector<double> inv(static_cast<std::size_t>(m_) * m_, 0.0);
    for (int i = 0; i < m_; ++i) inv[static_cast<std::size_t>(i) * m_ + i] = 1.0;
    auto at = [&](std::vector<double>& v, int r, int c) -> double& {
      return v[static_cast<std::size_t>(r) * m_ + c];
    };
    std::vector<int> perm(m_);
    for (int i = 0; i < m_; ++i) perm[i] = i;
    for (int c = 0; c < m_; ++c) {
      int best = -1;
      double best_abs = 1e-11;
      for (int r = c; r < m_; ++r) {
        if (std::abs(at(mat, r, c)) > best_abs) {
          best_abs = std::abs(at(mat, r, c));
          best = r;
        }
      }
      if (best < 0) return false;
      if (best != c) {
        for (int k = 0; k < m_; ++k) {
          std::swap(at(mat, best, k), at(mat, c, k));
          std::swap(at(inv, best, k), at(inv, c, k));
        }
      }
      const double p = at(mat, c, c);
      for (int k = 0; k < m_; ++k) {
        at(mat, c, k) /= p;
        at(inv, c, k) /= p;
      }
      for (int r = 0; r < m_; ++r) {
        if (r == c) continue;
        const double f = at(mat, r, c);
        if (f == 0.0) continue;
        for (int k = 0; k < m_; ++k) {
          at(mat, r, k) -= f * at(mat, c, k);
          at(inv, r, k) -= f * at(inv, c, k);
        }
      }
    }
    // inv now equals B^{-1} with rows = basis positions, columns = constraints.
    binv_ = std::move(inv);
    updates_ = 0;
    recompute_basic_values();
    return true;
  }

  void recompute_basic_values() {
    std::vector<double> rhs = b_;
    for (int j = 0; j < ncols_; ++j) {
      if (state_[j] == State::basic || x_[j] == 0.0) continue;
      for (const auto& [i, a] : cols_[j]) rhs[i] -= a * x_[j];
    }
    for (int k = 0; k < m_; ++k) {
      const double* row = binv_row(k);
      double v = 0.0;
      for (int i = 0; i < m_; ++i) v += row[i] * rhs[i];
      x_[head_[k]] = v;
    }
  }

  std::vector<double> duals(const std::vector<double>& c) const {
    std::vector<double> y(m_, 0.0);
    for (int k = 0; k < m_; ++k) {
      const double cb = c[head_[k]];
      if (cb == 0.0) continue;
      const double* row = binv_row(k);
      for (int i = 0; i < m_; ++i) y[i] += cb * row[i];
    }
    return y;
  }

  double reduced_cost(const std::vector<double>& c, const std::vector<double>& y, int j) const {
    double d = c[j];
    for (const auto& [i, a] : cols_[j]) d -= y[i] * a;
    return d;
  }

  std::vector<double> ftran(int j) const {
    std::vector<double> alpha(m_, 0.0);
    for (const auto& [i, a] : cols_[j]) {
      for (int k = 0; k < m_; ++k) alpha[k] += binv_row(k)[i] * a;
    }
    return alpha;
  }

  void pivot(int r, int q, const std::vector<double>& alpha) {
    double* prow = binv_row(r);
    const double p = alpha[r];
    for (int i = 0; i < m_; ++i) prow[i] /= p;
    for (int k = 0; k < m_; ++k) {
      if (k == r || alpha[k] == 0.0) continue;
      double* row = binv_row(k);
      const double f = alpha[k];
      for (int i = 0; i < m_; ++i) row[i] -= f * prow[i];
    }
    head_[r] = q;
    state_[q] = State::basic;
    if (++updates_ >= kRefactorEvery && !refactor()) {
      throw InternalError("simplex basis became singular");
    }
  }

  bool fixed(int j) const { return lo_[j] == up_[j]; }

  double objective(const std::vector<double>& c) const {
    double total = 0.0;
    for (int j = 0; j < ncols_; ++j) total += c[j] * x_[j];
    return total;
  }

  Status primal(const std::vector<double>& c, const Deadline& deadline) {
    bool bland = false;
    std::int64_t stall = 0;
    const std::int64_t stall_limit = 5LL * (m_ + n_);
    double last_obj = objective(c);
    const std::int64_t max_iter = 200LL * (m_ + n_) + 1000;
    for (std::int64_t it = 0;; ++it) {
      if (it > max_iter) throw InternalError("simplex iteration limit exceeded");
      if ((it & 15) == 0 && deadline.expired()) return Status::time_limit;
      const auto y = duals(c);
      int q = -1;
      double best = 0.0;
      int dir = 0;
      for (int j = 0; j < ncols_; ++j) {
        if (state_[j] == State::basic || fixed(j)) continue;
        const double d = reduced_cost(c, y, j);
        int dj = 0;
        if (state_[j] == State::lower && d < -kOptTol) dj = 1;
        if (state_[j] == State::upper && d > kOptTol) dj = -1;
        if (state_[j] == State::zero && std::abs(d) > kOptTol) dj = d < 0 ? 1 : -1;
        if (dj == 0) continue;
        if (bland) {
          q = j;
          dir = dj;
          break;
        }
        if (std::abs(d) > best) {
          best = std::abs(d);
          q = j;
          dir = dj;
        }
      }
      if (q < 0) return Status::optimal;

      const auto alpha = ftran(q);
      double t = up_[q] - lo_[q];  // bound flip distance
      int leave = -1;
      // First pass: minimum ratio. Second pass: among near-ties pick the
      // largest pivot (or lowest variable index under Bland).
      auto limit = [&](int k) -> double {
        const double a = alpha[k];
        if (std::abs(a) < kPivotTol) return kInf;
        const double rate = -dir * a;
        const int var = head_[k];
        if (rate < 0) {
          return std::isfinite(lo_[var]) ? std::max(0.0, (x_[var] - lo_[var]) / -rate) : kInf;
        }
        return std::isfinite(up_[var]) ? std::max(0.0, (up_[var] - x_[var]) / rate) : kInf;
      };
      double tmin = kInf;
      for (int k = 0; k < m_; ++k) tmin = std::min(tmin, limit(k));
      if (tmin < t) {
        const double tie = tmin + 1e-12 * std::max(1.0, tmin);
        double best_piv = -1.0;
        for (int k = 0; k < m_; ++k) {
          const double l = limit(k);
          if (l > tie) continue;
          if (bland) {
            if (leave < 0 || head_[k] < head_[leave]) leave = k;
          } else if (std::abs(alpha[k]) > best_piv) {
            best_piv = std::abs(alpha[k]);
            leave = k;
          }
        }
        t = limit(leave);
      }
      if (!std::isfinite(t)) return Status::unbounded;

      for (int k = 0; k < m_; ++k) x_[head_[k]] -= dir * t * alpha[k];
      x_[q] += dir * t;
      if (leave < 0) {
        state_[q] = dir > 0 ? State::upper : State::lower;
        place_nonbasic(q);
      } else {
        const int out = head_[leave];
        const double rate = -dir * alpha[leave];
        state_[out] = (rate < 0 || fixed(out)) ? State::lower : State::upper;
        place_nonbasic(out);
        pivot(leave, q, alpha);
      }
      ++iterations_;

      const double obj = objective(c);
      if (obj < last_obj - 1e-12 * std::max(1.0, std::abs(last_obj))) {
        stall = 0;
        bland = false;
      } else if (++stall > stall_limit) {
        bland = true;
      }
      last_obj = obj;
    }
  }

  Status dual(const Deadline& deadline) {
    std::int64_t stall = 0;
    bool bland = false;
    const std::int64_t max_iter = 50LL * (m_ + n_) + 1000;
    for (std::int64_t it = 0;; ++it) {
      if (it > max_iter) return Status::time_limit;
      if ((it & 15) == 0 && deadline.expired()) return Status::time_limit;
      int r = -1;
      double worst = 0.0;
      bool below = false;
      for (int k = 0; k < m_; ++k) {
        const int var = head_[k];
        const double scale = kFeasTol * std::max(1.0, std::abs(x_[var]));
        double infeas = 0.0;
        bool is_below = false;
        if (x_[var] < lo_[var] - scale) {
          infeas = lo_[var] - x_[var];
          is_below = true;
        } else if (x_[var] > up_[var] + scale) {
          infeas = x_[var] - up_[var];
        }
        if (infeas <= 0.0) continue;
        if (bland ? (r < 0 || var < head_[r]) : infeas > worst) {
          worst = infeas;
          r = k;
          below = is_below;
        }
      }
      if (r < 0) return Status::optimal;

      const auto y = duals(cost_);
      const double* rho = binv_row(r);
      int q = -1;
      double best_ratio = kInf;
      double best_piv = 0.0;
      for (int j = 0; j < ncols_; ++j) {
        if (state_[j] == State::basic || fixed(j)) continue;
        double arj = 0.0;
        for (const auto& [i, a] : cols_[j]) arj += rho[i] * a;
        if (std::abs(arj) < kPivotTol) continue;
        bool ok = false;
        if (state_[j] == State::zero) {
          ok = true;
        } else if (below) {
          ok = state_[j] == State::lower ? arj < 0 : arj > 0;
        } else {
          ok = state_[j] == State::lower ? arj > 0 : arj < 0;
        }
        if (!ok) continue;
        const double ratio = std::abs(reduced_cost(cost_, y, j)) / std::abs(arj);
        if (ratio < best_ratio - 1e-12 ||
            (ratio <= best_ratio + 1e-12 && std::abs(arj) > best_piv)) {
          best_ratio = ratio;
          best_piv = std::abs(arj);
          q = j;
        }
      }
      if (q < 0) return Status::infeasible;

      const auto alpha = ftran(q);
      const int out = head_[r];
      const double target = below ? lo_[out] : up_[out];
      const double delta = (x_[out] - target) / alpha[r];
      for (int k = 0; k < m_; ++k) x_[head_[k]] -= alpha[k] * delta;
      x_[q] += delta;
      state_[out] = below ? State::lower : State::upper;
      if (fixed(out)) state_[out] = State::lower;
      place_nonbasic(out);
      pivot(r, q, alpha);
      ++iterations_;
      if (best_ratio <= 1e-12) {
        if (++stall > 5LL * (m_ + n_)) bland = true;
      } else {
        stall = 0;
        bland = false;
      }
    }
  }

  int m_;
  int n_;
  int ncols_;
  std::vector<std::vector<std::pair<int, double>>> cols_;
  std::vector<double> b_;
  std::vector<double> lo_, up_, cost_;
  std::vector<double> model_lo_, model_up_;
  std::vector<double> x_;
  std::vector<State> state_;
  std::vector<int> head_;
  std::vector<double> binv_;
  int updates_ = 0;
  std::int64_t iterations_ = 0;
};

LpSolution run_lp(Simplex& spx, Status status) {
  LpSolution out;
  out.status = status;
  if (status == Status::optimal || status == Status::time_limit) spx.extract(out);
  out.iterations = spx.iterations();
  return out;
}

}  // namespace

LpSolution solve_lp(const LinearModel& model, double time_limit_seconds) {
  model.validate();
  Simplex spx(model);
  const Deadline deadline(time_limit_seconds);
  const Status s = spx.solve_from_scratch(deadline);
  return run_lp(spx, s);
}

// ---------------------------------------------------------------------------
// Branch and bound

namespace {

struct Node {
  double bound;
  std::int64_t id;
  int depth;
  std::vector<std::int8_t> fix;  // per binary: -1 free, 0, 1
  std::shared_ptr<const Basis> basis;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    if (a.depth != b.depth) return a.depth < b.depth;
    return a.id > b.id;
  }
};

double gap_of(double obj, double bound) {
  if (!std::isfinite(obj) || !std::isfinite(bound)) return kInf;
  return std::max(0.0, (obj - bound) / std::max(1.0, std::abs(obj)));
}

// Continuous part re-solved from scratch with every binary fixed at its value
// in `vals`, so equal binary points report bit-identical objectives.
void polish_continuous(const LinearModel& model, std::vector<double>& vals, double& objective) {
  bool has_continuous = false;
  for (const auto& v : model.variables()) has_continuous |= v.type != VarType::binary;
  if (!has_continuous) return;
  Simplex spx(model);
  spx.reset_bounds();
  for (int j = 0; j < model.num_variables(); ++j) {
    if (model.variables()[j].type == VarType::binary) spx.set_bounds(j, vals[j], vals[j]);
  }
  if (spx.solve_from_scratch(Deadline(kInf)) != Status::optimal) return;
  std::vector<double> polished = vals;
  for (int j = 0; j < model.num_variables(); ++j) {
    if (model.variables()[j].type != VarType::binary) polished[j] = spx.value(j);
  }
  if (model.first_violation(polished)) return;
  const double obj = model.objective_value(polished);
  if (obj > objective + 1e-9 * std::max(1.0, std::abs(objective))) return;
  vals = std::move(polished);
  objective = obj;
}

}  // namespace

MipSolution solve_mip(const LinearModel& model, const MipOptions& options) {
  model.validate();
  const Deadline deadline(options.time_limit_seconds);
  std::vector<int> binaries;
  for (int j = 0; j < model.num_variables(); ++j) {
    if (model.variables()[j].type == VarType::binary) binaries.push_back(j);
  }

  MipSolution out;
  double incumbent = kInf;
  if (options.incumbent && !model.first_violation(*options.incumbent)) {
    out.values = *options.incumbent;
    incumbent = model.objective_value(out.values);
  }
  auto prune_level = [&]() {
    if (!std::isfinite(incumbent)) return kInf;
    const double scale = std::max(1.0, std::abs(incumbent));
    return incumbent - std::max(1e-9 * scale, options.gap_tolerance * scale);
  };

  Simplex spx(model);
  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  std::int64_t next_id = 0;
  open.push({-kInf, next_id++, 0, std::vector<std::int8_t>(binaries.size(), -1), nullptr});
  bool root_unbounded = false;
  bool stopped = false;
  double global_bound = -kInf;

  while (!open.empty()) {
    if (deadline.expired() || out.nodes >= options.node_limit) {
      stopped = true;
      break;
    }
    Node node = open.top();
    open.pop();
    global_bound = std::max(global_bound, std::min(node.bound, incumbent));
    if (node.bound >= prune_level()) continue;

    spx.reset_bounds();
    for (std::size_t b = 0; b < binaries.size(); ++b) {
      if (node.fix[b] >= 0) spx.set_bounds(binaries[b], node.fix[b], node.fix[b]);
    }
    const Status s = node.basis ? spx.resolve(*node.basis, deadline) : spx.solve_from_scratch(deadline);
    ++out.nodes;
    if (s == Status::time_limit) {
      open.push(node);
      stopped = true;
      break;
    }
    if (s == Status::unbounded) {
      root_unbounded = true;
      break;
    }
    if (s == Status::infeasible) {
      out.bound_trace.push_back(global_bound);
      continue;
    }
    LpSolution lp;
    spx.extract(lp);
    const double lp_obj = std::max(lp.objective, node.bound);
    if (lp_obj >= prune_level()) {
      out.bound_trace.push_back(global_bound);
      continue;
    }

    int branch = -1;
    double best_frac = 1.0;
    for (std::size_t b = 0; b < binaries.size(); ++b) {
      const double v = lp.primal[binaries[b]];
      const double frac = std::abs(v - std::round(v));
      if (frac <= kFeasTol) continue;
      const double dist = std::abs(v - std::floor(v) - 0.5);
      if (dist < best_frac - 1e-12) {
        best_frac = dist;
        branch = static_cast<int>(b);
      }
    }
    if (branch < 0) {
      std::vector<double> vals = lp.primal;
      for (int j : binaries) vals[j] = std::round(vals[j]);
      const double obj = model.objective_value(vals);
      if (obj < incumbent) {
        incumbent = obj;
        out.values = std::move(vals);
      }
      out.bound_trace.push_back(global_bound);
      continue;
    }
    // Cheap rounding heuristic.
    {
      std::vector<double> vals = lp.primal;
      for (int j : binaries) vals[j] = std::round(vals[j]);
      if (!model.first_violation(vals)) {
        const double obj = model.objective_value(vals);
        if (obj < incumbent) {
          incumbent = obj;
          out.values = std::move(vals);
        }
      }
    }
    auto basis = std::make_shared<const Basis>(spx.basis());
    for (int value : {0, 1}) {
      Node child{lp_obj, next_id++, node.depth + 1, node.fix, basis};
      child.fix[branch] = static_cast<std::int8_t>(value);
      open.push(std::move(child));
    }
    out.bound_trace.push_back(global_bound);
  }

  if (root_unbounded) {
    out.status = Status::unbounded;
    return out;
  }
  if (stopped) {
    double b = incumbent;
    if (!open.empty()) b = std::min(b, open.top().bound);
    out.bound = std::max(global_bound, b);
    out.status = Status::time_limit;
  } else {
    out.bound = incumbent;
    out.status = std::isfinite(incumbent) ? Status::optimal : Status::infeasible;
  }
  if (std::isfinite(incumbent)) {
    polish_continuous(model, out.values, incumbent);
    out.objective = incumbent;
    if (out.bound > incumbent) out.bound = incumbent;
  }
  if (!out.bound_trace.empty() && out.bound_trace.back() > out.bound && std::isfinite(out.bound)) {
    out.bound = out.bound_trace.back();
  }
  out.gap = gap_of(out.objective, out.bound);
  return out;
}

MipSolution enumerate_tiny(const LinearModel& model, int max_binaries) {
  model.validate();
  std::vector<int> binaries;
  bool has_continuous = false;
  for (int j = 0; j < model.num_variables(); ++j) {
    if (model.variables()[j].type == VarType::binary) {
      binaries.push_back(j);
    } else {
      has_continuous = true;
    }
  }
  if (static_cast<int>(binaries.size()) > max_binaries) {
    throw InputError("enumerate_tiny: " + std::to_string(binaries.size()) +
                     " binaries exceed the limit of " + std::to_string(max_binaries));
  }
  MipSolution out;
  const std::uint64_t count = 1ULL << binaries.size();
  std::optional<Simplex> spx;
  if (has_continuous) spx.emplace(model);
  const Deadline none(kInf);
  for (std::uint64_t mask = 0; mask < count; ++mask) {
    std::vector<double> vals(model.num_variables(), 0.0);
    bool skip = false;
    for (std::size_t b = 0; b < binaries.size(); ++b) {
      const double v = (mask >> b) & 1ULL ? 1.0 : 0.0;
      const auto& var = model.variables()[binaries[b]];
      if (v < var.lower || v > var.upper) skip = true;
      vals[binaries[b]] = v;
    }
    if (skip) continue;
    ++out.nodes;
    if (has_continuous) {
      spx->reset_bounds();
      for (int j : binaries) spx->set_bounds(j, vals[j], vals[j]);
      const Status s = spx->solve_from_scratch(none);
      if (s == Status::unbounded) {
        out.status = Status::unbounded;
        return out;
      }
      if (s != Status::optimal) continue;
      for (int j = 0; j < model.num_variables(); ++j) {
        if (model.variables()[j].type != VarType::binary) vals[j] = spx->value(j);
      }
    } else if (model.first_violation(vals)) {
      continue;
    }
    const double obj = model.objective_value(vals);
    if (obj < out.objective - 1e-9 * std::max(1.0, std::abs(obj))) {
      out.objective = obj;
      out.values = std::move(vals);
    }
  }
  if (std::isfinite(out.objective)) {
    polish_continuous(model, out.values, out.objective);
    out.status = Status::optimal;
    out.bound = out.objective;
    out.gap = 0.0;
  }
  return out;
}

// ---------------------------------------------------------------------------
// MPS exchange

namespace {

std::string mangle(char prefix, int index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%c%07d", prefix, index);
  return buf;
}

std::string mps_number(double v) {
  char buf[64];
  for (int prec = 12; prec >= 1; --prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::string(buf).size() <= 12) return buf;
  }
  return buf;
}

// Fixed MPS fields: 2-3 code, 5-12 name, 15-22 name, 25-36 value.
std::string field_line(const std::string& code, const std::string& a, const std::string& b,
                       const std::string& value) {
  char buf[96];
  std::snprintf(buf, sizeof buf, " %-2s %-8s  %-8s  %12s", code.c_str(), a.c_str(), b.c_str(),
                value.c_str());
  std::string s(buf);
  while (!s.empty() && s.back() == ' ') s.pop_back();
  return s;
}

}  // namespace

std::vector<std::string> mangled_column_names(const LinearModel& model) {
  std::vector<std::string> out;
  for (int j = 0; j < model.num_variables(); ++j) out.push_back(mangle('C', j + 1));
  return out;
}

std::vector<std::string> mangled_row_names(const LinearModel& model) {
  std::vector<std::string> out;
  for (int i = 0; i < model.num_constraints(); ++i) out.push_back(mangle('R', i + 1));
  return out;
}

void export_mps(const LinearModel& model, const std::filesystem::path& path) {
  model.validate();
  const auto cnames = mangled_column_names(model);
  const auto rnames = mangled_row_names(model);
  std::ofstream os(path);
  if (!os) throw InputError("cannot write MPS file '" + path.string() + "'");
  os << "NAME          TRSPMODEL\n";
  os << "ROWS\n";
  os << " N  OBJ\n";
  for (int i = 0; i < model.num_constraints(); ++i) {
    const Sense s = model.constraints()[i].sense;
    os << ' ' << (s == Sense::le ? 'L' : s == Sense::ge ? 'G' : 'E') << "  " << rnames[i] << '\n';
  }
  std::vector<std::vector<std::pair<int, double>>> cols(model.num_variables());
  for (int i = 0; i < model.num_constraints(); ++i) {
    for (const auto& [j, a] : model.constraints()[i].terms) cols[j].push_back({i, a});
  }
  os << "COLUMNS\n";
  bool in_int = false;
  int marker = 0;
  for (int j = 0; j < model.num_variables(); ++j) {
    const auto& v = model.variables()[j];
    const bool is_int = v.type == VarType::binary;
    if (is_int != in_int) {
      os << "    " << mangle('M', marker++) << "  'MARKER'                 "
         << (is_int ? "'INTORG'" : "'INTEND'") << '\n';
      in_int = is_int;
    }
    auto& entries = cols[j];
    std::sort(entries.begin(), entries.end());
    if (v.cost != 0.0 || entries.empty()) os << field_line("", cnames[j], "OBJ", mps_number(v.cost)) << '\n';
    for (const auto& [i, a] : entries) os << field_line("", cnames[j], rnames[i], mps_number(a)) << '\n';
  }
  if (in_int) os << "    " << mangle('M', marker++) << "  'MARKER'                 'INTEND'\n";
  os << "RHS\n";
  for (int i = 0; i < model.num_constraints(); ++i) {
    const double rhs = model.constraints()[i].rhs;
    if (rhs != 0.0) os << field_line("", "RHS", rnames[i], mps_number(rhs)) << '\n';
  }
  os << "BOUNDS\n";
  for (int j = 0; j < model.num_variables(); ++j) {
    const auto& v = model.variables()[j];
    if (v.type == VarType::binary && v.lower == 0.0 && v.upper == 1.0) {
      os << field_line("BV", "BND", cnames[j], "") << '\n';
      continue;
    }
    if (v.lower == v.upper) {
      os << field_line("FX", "BND", cnames[j], mps_number(v.lower)) << '\n';
      continue;
    }
    if (!std::isfinite(v.lower) && !std::isfinite(v.upper)) {
      os << field_line("FR", "BND", cnames[j], "") << '\n';
      continue;
    }
    if (!std::isfinite(v.lower)) {
      os << field_line("MI", "BND", cnames[j], "") << '\n';
    } else if (v.lower != 0.0) {
      os << field_line("LO", "BND", cnames[j], mps_number(v.lower)) << '\n';
    }
    if (std::isfinite(v.upper)) os << field_line("UP", "BND", cnames[j], mps_number(v.upper)) << '\n';
  }
  os << "ENDATA\n";
  if (!os) throw InputError("failed writing MPS file '" + path.string() + "'");

  std::ofstream names(path.string() + ".names");
  if (!names) throw InputError("cannot write name table for '" + path.string() + "'");
  for (int j = 0; j < model.num_variables(); ++j) names << cnames[j] << ' ' << model.variables()[j].name << '\n';
  for (int i = 0; i < model.num_constraints(); ++i) names << rnames[i] << ' ' << model.constraints()[i].name << '\n';
}

MipSolution read_external_solution(const LinearModel& model, const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw InputError("cannot read solution file '" + path.string() + "'");
  std::map<std::string, int> lookup;
  const auto cnames = mangled_column_names(model);
  for (int j = 0; j < model.num_variables(); ++j) {
    lookup[cnames[j]] = j;
    lookup[model.variables()[j].name] = j;
  }
  std::vector<double> vals(model.num_variables(), 0.0);
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string name;
    if (!(ls >> name) || name[0] == '#') continue;
    double v = 0.0;
    if (!(ls >> v)) {
      throw InputError(path.string() + ":" + std::to_string(line_no) + ": expected '<name> <value>'");
    }
    auto it = lookup.find(name);
    if (it == lookup.end()) {
      throw InputError(path.string() + ":" + std::to_string(line_no) + ": unknown variable '" + name + "'");
    }
    vals[it->second] = v;
  }
  if (auto bad = model.first_violation(vals, kFeasTol)) {
    throw InputError("external solution violates '" + *bad + "'");
  }
  MipSolution out;
  out.status = Status::optimal;
  out.values = std::move(vals);
  out.objective = model.objective_value(out.values);
  out.bound = out.objective;
  out.gap = 0.0;
  return out;
}

MipSolution solve_external(const LinearModel& model, const std::string& command_template,
                           const std::filesystem::path& workdir) {
  std::filesystem::create_directories(workdir);
  const auto mps = workdir / "model.mps";
  const auto sol = workdir / "model.sol";
  std::filesystem::remove(sol);
  export_mps(model, mps);
  std::string cmd = command_template;
  auto replace_all = [&](const std::string& key, const std::string& value) {
    for (std::size_t pos = cmd.find(key); pos != std::string::npos; pos = cmd.find(key, pos + value.size())) {
      cmd.replace(pos, key.size(), value);
    }
  };
  replace_all("{mps}", mps.string());
  replace_all("{sol}", sol.string());
  const int rc = std::system(cmd.c_str());
  if (rc != 0) throw InputError("external solver command failed with status " + std::to_string(rc));
  return read_external_solution(model, sol);
}

}  // namespace trsp::lp
