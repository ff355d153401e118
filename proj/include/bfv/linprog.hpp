#pragma once

// Bounded-variable two-phase revised simplex. Dense explicit basis inverse
// with product-form pivot updates and periodic refactorization, sparse
// columns, Dantzig pricing with a Bland anti-cycling fallback, bound flips,
// and warm restarts after cost changes (the structure placement solvers
// need: a few hundred rows, tens of thousands of columns, <=3 nonzeros per
// column, repeated solves that differ only in the objective).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace bfv {

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct MalformedLpError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// min objective.x  s.t.  ineq_rows.x <= ineq_bounds, eq_rows.x = eq_rhs,
// lower <= x <= upper. Empty lower/upper mean the [0,1] box.
struct LinearProgram {
  int num_vars = 0;
  std::vector<double> objective;
  std::vector<std::vector<double>> ineq_rows;
  std::vector<double> ineq_bounds;
  std::vector<std::vector<double>> eq_rows;
  std::vector<double> eq_rhs;
  std::vector<double> lower;
  std::vector<double> upper;
};

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
};

namespace lp_detail {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Equality-form core: min c.x s.t. A x = b, lo <= x <= hi. Callers append
// their own slack variables; phase-1 artificials are managed internally.
class BoundedSimplex {
  enum class State : std::uint8_t { AtLower, AtUpper, Basic };

 public:
  explicit BoundedSimplex(std::vector<double> rhs)
      : m_(static_cast<int>(rhs.size())), b_(std::move(rhs)) {
    for (double v : b_)
      if (!std::isfinite(v)) throw MalformedLpError("non-finite rhs");
    basic_.assign(m_, -1);
  }

  int add_variable(double lo, double hi, double cost,
                   std::vector<std::pair<int, double>> column) {
    if (n_user_ != static_cast<int>(cols_.size()))
      throw std::logic_error("cannot add variables after the first solve");
    if (std::isnan(lo) || std::isnan(hi) || lo > hi)
      throw MalformedLpError("invalid variable bounds");
    if (!std::isfinite(lo) && !std::isfinite(hi))
      throw MalformedLpError("free variables unsupported");
    if (!std::isfinite(cost)) throw MalformedLpError("non-finite cost");
    for (const auto& [r, v] : column) {
      if (r < 0 || r >= m_) throw MalformedLpError("column row out of range");
      if (!std::isfinite(v)) throw MalformedLpError("non-finite coefficient");
    }
    lo_.push_back(lo);
    hi_.push_back(hi);
    cost_.push_back(cost);
    cols_.push_back(std::move(column));
    state_.push_back(std::isfinite(lo) ? State::AtLower : State::AtUpper);
    in_row_.push_back(-1);
    return n_user_++;
  }

  // Replaces the phase-2 costs of the caller's variables (warm restart).
  void set_costs(const std::vector<double>& c) {
    if (static_cast<int>(c.size()) != n_user_)
      throw std::logic_error("cost vector size mismatch");
    for (double v : c)
      if (!std::isfinite(v)) throw MalformedLpError("non-finite cost");
    std::copy(c.begin(), c.end(), cost_.begin());
  }

  LpStatus solve() {
    if (m_ == 0) return last_status_ = solve_unconstrained();
    if (last_status_ != LpStatus::Optimal) {
      reset_cold();
      if (!phase1()) return last_status_ = LpStatus::Infeasible;
    } else {
      recompute_basic_values();
    }
    return last_status_ = run_simplex(/*phase1=*/false);
  }

  double value_of(int j) const {
    switch (state_[j]) {
      case State::Basic:
        return xb_[in_row_[j]];
      case State::AtLower:
        return lo_[j];
      case State::AtUpper:
        return hi_[j];
    }
    return 0.0;
  }

  double objective() const {
    double v = 0.0;
    for (int j = 0; j < n_user_; ++j) v += cost_[j] * value_of(j);
    return v;
  }

  int rows() const { return m_; }
  int pivots() const { return pivots_; }

  double dual_tol = 1e-10;
  double feas_tol = 1e-8;
  double pivot_tol = 1e-10;
  int refactor_period = 128;

 private:
  LpStatus solve_unconstrained() {
    for (int j = 0; j < n_user_; ++j) {
      if (lo_[j] == hi_[j]) {
        state_[j] = State::AtLower;
        continue;
      }
      if (cost_[j] >= 0.0) {
        if (!std::isfinite(lo_[j])) return LpStatus::Unbounded;
        state_[j] = State::AtLower;
      } else {
        if (!std::isfinite(hi_[j])) return LpStatus::Unbounded;
        state_[j] = State::AtUpper;
      }
    }
    return LpStatus::Optimal;
  }

  void reset_cold() {
    cols_.resize(n_user_);
    lo_.resize(n_user_);
    hi_.resize(n_user_);
    cost_.resize(n_user_);
    state_.resize(n_user_);
    in_row_.resize(n_user_);
    artificial_start_ = n_user_;
    for (int j = 0; j < n_user_; ++j) {
      state_[j] = std::isfinite(lo_[j]) ? State::AtLower : State::AtUpper;
      in_row_[j] = -1;
    }
    std::vector<double> resid = b_;
    for (int j = 0; j < n_user_; ++j) {
      const double v = nonbasic_value(j);
      if (v != 0.0)
        for (const auto& [r, a] : cols_[j]) resid[r] -= a * v;
    }
    binv_.assign(static_cast<std::size_t>(m_) * m_, 0.0);
    xb_.assign(m_, 0.0);
    for (int r = 0; r < m_; ++r) {
      const double sign = resid[r] >= 0.0 ? 1.0 : -1.0;
      lo_.push_back(0.0);
      hi_.push_back(kInf);
      cost_.push_back(0.0);
      cols_.push_back({{r, sign}});
      state_.push_back(State::Basic);
      in_row_.push_back(r);
      basic_[r] = static_cast<int>(cols_.size()) - 1;
      xb_[r] = std::abs(resid[r]);
      binv_[static_cast<std::size_t>(r) * m_ + r] = sign;
    }
    pivots_since_refactor_ = 0;
  }

  bool phase1() {
    if (run_simplex(/*phase1=*/true) != LpStatus::Optimal)
      throw std::runtime_error("phase 1 terminated abnormally");
    double infeas = 0.0;
    for (int r = 0; r < m_; ++r)
      if (basic_[r] >= artificial_start_) infeas += xb_[r];
    if (infeas > feas_tol) return false;
    // Pivot residual artificials out of the basis where possible; rows with
    // no eligible pivot are linearly dependent and keep a frozen artificial.
    for (int r = 0; r < m_; ++r) {
      if (basic_[r] < artificial_start_) continue;
      int replacement = -1;
      double best = pivot_tol * 100.0;
      for (int j = 0; j < n_user_; ++j) {
        if (state_[j] == State::Basic) continue;
        double wr = 0.0;
        for (const auto& [rr, a] : cols_[j])
          wr += binv_[static_cast<std::size_t>(r) * m_ + rr] * a;
        if (std::abs(wr) > best) {
          best = std::abs(wr);
          replacement = j;
        }
      }
      if (replacement < 0) continue;
      std::vector<double> w = ftran(cols_[replacement]);
      const int leaving = basic_[r];
      const double enter_value = nonbasic_value(replacement);
      state_[leaving] = State::AtLower;
      in_row_[leaving] = -1;
      basic_[r] = replacement;
      in_row_[replacement] = r;
      state_[replacement] = State::Basic;
      update_binv(w, r);
      xb_[r] = enter_value;
      ++pivots_;
    }
    for (int j = artificial_start_; j < static_cast<int>(cols_.size()); ++j) {
      lo_[j] = 0.0;
      hi_[j] = 0.0;
      if (state_[j] != State::Basic) state_[j] = State::AtLower;
    }
    recompute_basic_values();
    return true;
  }

  double nonbasic_value(int j) const {
    return state_[j] == State::AtUpper ? hi_[j] : lo_[j];
  }

  double cost_in_phase(int j, bool phase1) const {
    if (phase1) return j >= artificial_start_ ? 1.0 : 0.0;
    return cost_[j];
  }

  std::vector<double> ftran(const std::vector<std::pair<int, double>>& col)
      const {
    std::vector<double> w(m_, 0.0);
    for (const auto& [r, v] : col) {
      const double* bc = binv_.data() + r;
      for (int i = 0; i < m_; ++i) w[i] += bc[static_cast<std::size_t>(i) * m_] * v;
    }
    return w;
  }

  std::vector<double> btran_costs(bool phase1) const {
    std::vector<double> y(m_, 0.0);
    for (int i = 0; i < m_; ++i) {
      const double cb = cost_in_phase(basic_[i], phase1);
      if (cb == 0.0) continue;
      const double* row = binv_.data() + static_cast<std::size_t>(i) * m_;
      for (int r = 0; r < m_; ++r) y[r] += cb * row[r];
    }
    return y;
  }

  void update_binv(const std::vector<double>& w, int r) {
    const double piv = w[r];
    double* rowr = binv_.data() + static_cast<std::size_t>(r) * m_;
    for (int i = 0; i < m_; ++i) {
      if (i == r) continue;
      const double f = w[i] / piv;
      if (f == 0.0) continue;
      double* rowi = binv_.data() + static_cast<std::size_t>(i) * m_;
      for (int k = 0; k < m_; ++k) rowi[k] -= f * rowr[k];
    }
    for (int k = 0; k < m_; ++k) rowr[k] /= piv;
    ++pivots_since_refactor_;
  }

  void refactor() {
    // Gauss-Jordan inverse of the current basis matrix.
    std::vector<double> a(static_cast<std::size_t>(m_) * m_, 0.0);
    std::vector<double> inv(static_cast<std::size_t>(m_) * m_, 0.0);
    for (int c = 0; c < m_; ++c)
      for (const auto& [r, v] : cols_[basic_[c]])
        a[static_cast<std::size_t>(r) * m_ + c] += v;
    for (int i = 0; i < m_; ++i) inv[static_cast<std::size_t>(i) * m_ + i] = 1.0;
    for (int c = 0; c < m_; ++c) {
      int piv = c;
      for (int r = c + 1; r < m_; ++r)
        if (std::abs(a[static_cast<std::size_t>(r) * m_ + c]) >
            std::abs(a[static_cast<std::size_t>(piv) * m_ + c]))
          piv = r;
      const double p = a[static_cast<std::size_t>(piv) * m_ + c];
      if (std::abs(p) < 1e-12)
        throw std::runtime_error("singular basis during refactorization");
      if (piv != c) {
        for (int k = 0; k < m_; ++k) {
          std::swap(a[static_cast<std::size_t>(piv) * m_ + k],
                    a[static_cast<std::size_t>(c) * m_ + k]);
          std::swap(inv[static_cast<std::size_t>(piv) * m_ + k],
                    inv[static_cast<std::size_t>(c) * m_ + k]);
        }
      }
      const double ip = 1.0 / a[static_cast<std::size_t>(c) * m_ + c];
      for (int k = 0; k < m_; ++k) {
        a[static_cast<std::size_t>(c) * m_ + k] *= ip;
        inv[static_cast<std::size_t>(c) * m_ + k] *= ip;
      }
      for (int r = 0; r < m_; ++r) {
        if (r == c) continue;
        const double f = a[static_cast<std::size_t>(r) * m_ + c];
        if (f == 0.0) continue;
        for (int k = 0; k < m_; ++k) {
          a[static_cast<std::size_t>(r) * m_ + k] -=
              f * a[static_cast<std::size_t>(c) * m_ + k];
          inv[static_cast<std::size_t>(r) * m_ + k] -=
              f * inv[static_cast<std::size_t>(c) * m_ + k];
        }
      }
    }
    binv_ = std::move(inv);
    pivots_since_refactor_ = 0;
  }

  void recompute_basic_values() {
    std::vector<double> rhs = b_;
    for (int j = 0; j < static_cast<int>(cols_.size()); ++j) {
      if (state_[j] == State::Basic) continue;
      const double v = nonbasic_value(j);
      if (v != 0.0)
        for (const auto& [r, a] : cols_[j]) rhs[r] -= a * v;
    }
    for (int i = 0; i < m_; ++i) {
      const double* row = binv_.data() + static_cast<std::size_t>(i) * m_;
      double s = 0.0;
      for (int r = 0; r < m_; ++r) s += row[r] * rhs[r];
      xb_[i] = s;
    }
  }

  // Returns entering variable and direction (+1 from lower, -1 from upper),
  // or {-1, 0} at optimality.
  std::pair<int, double> price(const std::vector<double>& y, bool phase1,
                               bool bland) const {
    int best = -1;
    double best_score = dual_tol;
    double best_dir = 0.0;
    const int total = static_cast<int>(cols_.size());
    for (int j = 0; j < total; ++j) {
      if (state_[j] == State::Basic || lo_[j] == hi_[j]) continue;
      double d = cost_in_phase(j, phase1);
      for (const auto& [r, v] : cols_[j]) d -= y[r] * v;
      double score = 0.0;
      double dir = 0.0;
      if (state_[j] == State::AtLower && d < -dual_tol) {
        score = -d;
        dir = 1.0;
      } else if (state_[j] == State::AtUpper && d > dual_tol) {
        score = d;
        dir = -1.0;
      } else {
        continue;
      }
      if (bland) return {j, dir};
      if (score > best_score) {
        best_score = score;
        best = j;
        best_dir = dir;
      }
    }
    return {best, best_dir};
  }

  LpStatus run_simplex(bool phase1) {
    const long max_pivots =
        20000L + 50L * (m_ + static_cast<long>(cols_.size()));
    long degenerate_run = 0;
    bool bland = false;
    for (long iter = 0; iter < max_pivots; ++iter) {
      if (pivots_since_refactor_ >= refactor_period) {
        refactor();
        recompute_basic_values();
      }
      const std::vector<double> y = btran_costs(phase1);
      const auto [q, dir] = price(y, phase1, bland);
      if (q < 0) return LpStatus::Optimal;
      const std::vector<double> w = ftran(cols_[q]);

      // Ratio test: step t >= 0 moves x_q by dir*t; basic i moves by
      // -dir*t*w[i]. First find the blocking step, then pick the most
      // stable blocking row among near-ties.
      const double t_flip = hi_[q] - lo_[q];
      double t_min = t_flip;
      for (int i = 0; i < m_; ++i) {
        const double wi = w[i] * dir;
        if (wi > pivot_tol) {
          const double floor_i = lo_[basic_[i]];
          if (!std::isfinite(floor_i)) continue;
          t_min = std::min(t_min, std::max(0.0, (xb_[i] - floor_i) / wi));
        } else if (wi < -pivot_tol) {
          const double ceil_i = hi_[basic_[i]];
          if (!std::isfinite(ceil_i)) continue;
          t_min = std::min(t_min, std::max(0.0, (ceil_i - xb_[i]) / (-wi)));
        }
      }
      if (!std::isfinite(t_min)) {
        if (phase1)
          throw std::runtime_error("unbounded phase-1 direction");
        return LpStatus::Unbounded;
      }

      int leave_row = -1;
      bool leave_to_lower = true;
      double best_piv = 0.0;
      for (int i = 0; i < m_; ++i) {
        const double wi = w[i] * dir;
        double t_i;
        bool to_lower;
        if (wi > pivot_tol) {
          const double floor_i = lo_[basic_[i]];
          if (!std::isfinite(floor_i)) continue;
          t_i = std::max(0.0, (xb_[i] - floor_i) / wi);
          to_lower = true;
        } else if (wi < -pivot_tol) {
          const double ceil_i = hi_[basic_[i]];
          if (!std::isfinite(ceil_i)) continue;
          t_i = std::max(0.0, (ceil_i - xb_[i]) / (-wi));
          to_lower = false;
        } else {
          continue;
        }
        if (t_i > t_min + 1e-9 * (1.0 + t_min)) continue;
        if (bland) {
          if (leave_row < 0 || basic_[i] < basic_[leave_row]) {
            leave_row = i;
            leave_to_lower = to_lower;
          }
        } else if (std::abs(w[i]) > best_piv) {
          best_piv = std::abs(w[i]);
          leave_row = i;
          leave_to_lower = to_lower;
        }
      }

      // leave_row < 0 means no basic ratio tied the minimum, so the minimum
      // was t_flip: the entering variable crosses to its other bound.
      const double t = leave_row < 0 ? t_flip : t_min;
      for (int i = 0; i < m_; ++i) xb_[i] -= dir * t * w[i];
      ++pivots_;
      if (leave_row < 0) {
        state_[q] = state_[q] == State::AtLower ? State::AtUpper
                                                : State::AtLower;
      } else {
        const int leaving = basic_[leave_row];
        state_[leaving] = leave_to_lower ? State::AtLower : State::AtUpper;
        in_row_[leaving] = -1;
        const double enter_value = nonbasic_value(q) + dir * t;
        basic_[leave_row] = q;
        in_row_[q] = leave_row;
        state_[q] = State::Basic;
        update_binv(w, leave_row);
        xb_[leave_row] = enter_value;
      }
      if (t <= 1e-12) {
        if (++degenerate_run > 100 + 2L * m_) bland = true;
      } else {
        degenerate_run = 0;
        bland = false;
      }
    }
    throw std::runtime_error("simplex iteration limit exceeded");
  }

  int m_ = 0;
  int n_user_ = 0;
  int artificial_start_ = 0;
  std::vector<double> b_;
  std::vector<std::vector<std::pair<int, double>>> cols_;
  std::vector<double> lo_, hi_, cost_;
  std::vector<State> state_;
  std::vector<int> in_row_;
  std::vector<int> basic_;
  std::vector<double> binv_;
  std::vector<double> xb_;
  int pivots_ = 0;
  int pivots_since_refactor_ = 0;
  LpStatus last_status_ = LpStatus::Infeasible;
};

}  // namespace lp_detail

inline LpResult solve_lp(const LinearProgram& lp, double tol = 1e-6) {
  const int n = lp.num_vars;
  if (n < 0) throw MalformedLpError("negative variable count");
  if (static_cast<int>(lp.objective.size()) != n)
    throw MalformedLpError("objective size != num_vars");
  if (lp.ineq_rows.size() != lp.ineq_bounds.size())
    throw MalformedLpError("inequality rows/bounds size mismatch");
  if (lp.eq_rows.size() != lp.eq_rhs.size())
    throw MalformedLpError("equality rows/rhs size mismatch");
  if (!lp.lower.empty() && static_cast<int>(lp.lower.size()) != n)
    throw MalformedLpError("lower bound size != num_vars");
  if (!lp.upper.empty() && static_cast<int>(lp.upper.size()) != n)
    throw MalformedLpError("upper bound size != num_vars");
  for (double v : lp.objective)
    if (!std::isfinite(v)) throw MalformedLpError("non-finite objective");

  const int mi = static_cast<int>(lp.ineq_rows.size());
  const int me = static_cast<int>(lp.eq_rows.size());
  const int m = mi + me;

  // Row equilibration keeps the core's absolute tolerances meaningful for
  // arbitrarily scaled inputs.
  std::vector<double> scale(m, 1.0);
  std::vector<double> rhs(m, 0.0);
  auto prep_row = [&](const std::vector<double>& row, double b, int r) {
    if (static_cast<int>(row.size()) != n)
      throw MalformedLpError("constraint row width != num_vars");
    double mx = 0.0;
    for (double v : row) {
      if (!std::isfinite(v)) throw MalformedLpError("non-finite coefficient");
      mx = std::max(mx, std::abs(v));
    }
    if (!std::isfinite(b)) throw MalformedLpError("non-finite bound");
    scale[r] = mx > 0.0 ? mx : 1.0;
    rhs[r] = b / scale[r];
  };
  for (int i = 0; i < mi; ++i) prep_row(lp.ineq_rows[i], lp.ineq_bounds[i], i);
  for (int i = 0; i < me; ++i) prep_row(lp.eq_rows[i], lp.eq_rhs[i], mi + i);

  lp_detail::BoundedSimplex core(rhs);
  for (int j = 0; j < n; ++j) {
    const double lo = lp.lower.empty() ? 0.0 : lp.lower[j];
    const double hi = lp.upper.empty() ? 1.0 : lp.upper[j];
    if (!std::isfinite(lo) || !std::isfinite(hi))
      throw MalformedLpError("variable bounds must be finite");
    std::vector<std::pair<int, double>> col;
    for (int i = 0; i < mi; ++i)
      if (lp.ineq_rows[i][j] != 0.0)
        col.emplace_back(i, lp.ineq_rows[i][j] / scale[i]);
    for (int i = 0; i < me; ++i)
      if (lp.eq_rows[i][j] != 0.0)
        col.emplace_back(mi + i, lp.eq_rows[i][j] / scale[mi + i]);
    core.add_variable(lo, hi, lp.objective[j], std::move(col));
  }
  for (int i = 0; i < mi; ++i)
    core.add_variable(0.0, lp_detail::kInf, 0.0, {{i, 1.0}});

  core.dual_tol = std::min(1e-9, tol);
  LpResult res;
  res.status = core.solve();
  res.iterations = core.pivots();
  if (res.status == LpStatus::Optimal) {
    res.x.resize(n);
    for (int j = 0; j < n; ++j) res.x[j] = core.value_of(j);
    res.value = 0.0;
    for (int j = 0; j < n; ++j) res.value += lp.objective[j] * res.x[j];
  }
  return res;
}

}  // namespace bfv
