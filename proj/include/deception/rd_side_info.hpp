#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "deception/prob_core.hpp"

namespace deception {

// Requested distortion is below the smallest achievable expected distortion.
class InfeasibleDistortion : public Error {
 public:
  using Error::Error;
};

struct RdOptions {
  double tol = 1e-9;          // bound on the Lagrangian objective gap
  int max_iterations = 10000;
  bool record_trace = false;  // keep rate + slope * distortion per iteration
};

struct RDPoint {
  double rate = 0.0;        // nats
  double distortion = 0.0;
  double slope = 0.0;       // Lagrange multiplier; +inf at the minimum-distortion end
  TestChannel channel;
  double objective_gap = 0.0;
  int iterations = 0;
  std::vector<double> objective_trace;
};

struct RDCurve {
  std::vector<RDPoint> points;  // distortion ascending
};

namespace detail {

// Alternating minimization for one conditional source Q(.|y) at a fixed slope.
// Channel rows are V(xhat|x) proportional to q(xhat) exp(-slope (d(x,xhat) - min_xhat d(x,.))).
// Each step takes the classical update and, when it does better, a damped Newton solve on the
// output law; either way the objective never increases and ln max_xhat c(xhat) bounds
// the distance of the produced channel's objective from the optimum.
class SliceSolver {
 public:
  SliceSolver(std::vector<double> source, const DistortionSpec& spec, double slope,
              const std::vector<double>* init_output)
      : p_(std::move(source)), spec_(spec), slope_(slope), nx_(spec.x_size()), nb_(spec.xhat_size()) {
    weights_.assign(static_cast<std::size_t>(nx_) * nb_, 0.0);
    for (int x = 0; x < nx_; ++x) {
      const double dmin = spec.row_min(x);
      for (int b = 0; b < nb_; ++b) {
        const double excess = spec(x, b) - dmin;
        weights_[x * nb_ + b] = std::isinf(slope) ? (excess == 0.0 ? 1.0 : 0.0) : std::exp(-slope * excess);
      }
    }
    if (init_output && static_cast<int>(init_output->size()) == nb_) {
      // Keep every component strictly positive so no symbol is lost for good.
      q_ = *init_output;
      for (double& v : q_) v = 0.999 * v + 0.001 / nb_;
    } else {
      q_.assign(nb_, 1.0 / nb_);
    }
  }

  // One update; returns the objective of the channel it produces.
  double step() {
    Evaluation best = evaluate(q_);
    if (nb_ > 1) {
      // Two active-set guesses: everything still alive, and only the symbols whose
      // multiplier says they belong to the optimal support.
      std::vector<bool> alive(nb_), support(nb_);
      int heaviest = 0;
      for (int b = 0; b < nb_; ++b) {
        alive[b] = q_[b] > 1e-13 || best.c[b] >= 1.0;
        support[b] = best.c[b] >= 1.0;
        if (q_[b] > q_[heaviest]) heaviest = b;
      }
      support[heaviest] = true;
      for (auto* active : {&alive, &support}) {
        auto candidate = newton_candidate(q_, *active);
        if (!candidate) continue;
        // Backtrack along the Newton direction until it beats the incumbent.
        std::vector<double> point(nb_);
        double t = 1.0;
        for (int halving = 0; halving < 4; ++halving, t *= 0.5) {
          for (int b = 0; b < nb_; ++b) point[b] = q_[b] + t * ((*candidate)[b] - q_[b]);
          Evaluation trial = evaluate(point);
          const double margin = 1e-15 * (1.0 + std::abs(best.objective));
          if (trial.objective < best.objective - margin ||
              (trial.objective <= best.objective + margin && trial.gap < best.gap)) {
            best = std::move(trial);
            break;
          }
        }
      }
    }
    current_ = std::move(best);
    q_ = current_.marginal;
    ++iterations_;
    return current_.objective;
  }

  double objective() const { return current_.objective; }
  double gap() const { return current_.gap; }
  int iterations() const { return iterations_; }
  const std::vector<double>& output() const { return q_; }
  double channel(Symbol x, Symbol b) const { return current_.channel[x * nb_ + b]; }

 private:
  struct Evaluation {
    std::vector<double> channel;
    std::vector<double> marginal;
    std::vector<double> c;   // sum_x p(x) W(x,b) / Z(x)
    std::vector<double> z;   // Z(x) = sum_b q(b) W(x,b)
    double gap = kInfinity;
    double objective = kInfinity;
  };

  Evaluation evaluate(const std::vector<double>& q) const {
    Evaluation e;
    e.channel.assign(static_cast<std::size_t>(nx_) * nb_, 0.0);
    e.marginal.assign(nb_, 0.0);
    e.c.assign(nb_, 0.0);
    e.z.assign(nx_, 0.0);
    for (int x = 0; x < nx_; ++x) {
      double z = 0.0;
      for (int b = 0; b < nb_; ++b) z += q[b] * weights_[x * nb_ + b];
      e.z[x] = z;
      for (int b = 0; b < nb_; ++b) {
        const double w = weights_[x * nb_ + b];
        e.channel[x * nb_ + b] = z > 0.0 ? q[b] * w / z : q[b];
        if (z > 0.0) e.c[b] += p_[x] * w / z;
      }
    }
    double cmax = 0.0;
    for (double v : e.c) cmax = std::max(cmax, v);
    e.gap = std::max(0.0, std::log(cmax));
    double s = 0.0;
    for (int b = 0; b < nb_; ++b) s += (e.marginal[b] = q[b] * e.c[b]);
    for (double& v : e.marginal) v /= s;
    double rate = 0.0, distortion = 0.0;
    for (int x = 0; x < nx_; ++x) {
      if (p_[x] <= 0.0) continue;
      for (int b = 0; b < nb_; ++b) {
        const double v = e.channel[x * nb_ + b];
        if (v <= 0.0) continue;
        rate += p_[x] * v * std::log(v / e.marginal[b]);
        distortion += p_[x] * v * spec_(x, b);
      }
    }
    rate = std::max(rate, 0.0);
    // A source symbol with no reachable reconstruction leaves the slope's feasible set.
    for (int x = 0; x < nx_; ++x)
      if (p_[x] > 0.0 && e.z[x] <= 0.0) return e;
    e.objective = std::isinf(slope_) ? rate : rate + slope_ * distortion;
    return e;
  }

  // -sum_x p(x) ln Z(x); +inf when some source symbol has no reachable reconstruction.
  double dual_value(const std::vector<double>& q, std::vector<double>* z_out = nullptr) const {
    double f = 0.0;
    if (z_out) z_out->assign(nx_, 0.0);
    for (int x = 0; x < nx_; ++x) {
      if (p_[x] <= 0.0) continue;
      double z = 0.0;
      for (int b = 0; b < nb_; ++b) z += q[b] * weights_[x * nb_ + b];
      if (z <= 0.0) return kInfinity;
      if (z_out) (*z_out)[x] = z;
      f -= p_[x] * std::log(z);
    }
    return f;
  }

  // Damped Newton for min -sum_x p(x) ln Z(x) over the face of the simplex spanned by
  // the active symbols. Steps stop short of the boundary, so components the face
  // optimum does not use shrink geometrically instead of being dropped.
  std::optional<std::vector<double>> newton_candidate(const std::vector<double>& q,
                                                      const std::vector<bool>& active) const {
    std::vector<int> idx;
    for (int b = 0; b < nb_; ++b)
      if (active[b]) idx.push_back(b);
    const int m = static_cast<int>(idx.size());
    if (m == 0) return std::nullopt;
    std::vector<double> u(nb_, 0.0);
    double mass = 0.0;
    for (int b : idx) mass += q[b];
    for (int b : idx) u[b] = mass > 0.0 ? q[b] / mass : 1.0 / m;
    std::vector<double> z;
    double f = dual_value(u, &z);
    if (std::isinf(f)) {
      for (int b : idx) u[b] = 0.5 * u[b] + 0.5 / m;
      f = dual_value(u, &z);
      if (std::isinf(f)) return std::nullopt;
    }
    if (m == 1) return u;
    std::vector<double> a, dir, trial;
    for (int it = 0; it < 60; ++it) {
      // Solve the KKT system [H 1; 1^T 0] [step; mu] = [c; 0] on the free symbols,
      // holding fixed any symbol at the boundary whose step points outward.
      std::vector<int> free = idx;
      double slope = 0.0, reach = 1.0;
      bool solved = false;
      while (free.size() >= 2) {
        const int k = static_cast<int>(free.size()), dim = k + 1;
        a.assign(static_cast<std::size_t>(dim) * (dim + 1), 0.0);
        double trace = 0.0;
        std::vector<double> c(k, 0.0);
        for (int i = 0; i < k; ++i) {
          for (int x = 0; x < nx_; ++x)
            if (p_[x] > 0.0) c[i] += p_[x] * weights_[x * nb_ + free[i]] / z[x];
          for (int j = 0; j <= i; ++j) {
            double h = 0.0;
            for (int x = 0; x < nx_; ++x) {
              if (p_[x] <= 0.0) continue;
              h += p_[x] * weights_[x * nb_ + free[i]] * weights_[x * nb_ + free[j]] / (z[x] * z[x]);
            }
            a[i * (dim + 1) + j] = a[j * (dim + 1) + i] = h;
          }
          trace += a[i * (dim + 1) + i];
          a[i * (dim + 1) + k] = 1.0;
          a[k * (dim + 1) + i] = 1.0;
          a[i * (dim + 1) + dim] = c[i];
        }
        for (int i = 0; i < k; ++i) a[i * (dim + 1) + i] += 1e-12 * trace + 1e-300;
        if (!solve_in_place(a, dim)) break;
        dir.assign(k, 0.0);
        int blocked = -1;
        for (int i = 0; i < k; ++i) {
          dir[i] = a[i * (dim + 1) + dim];
          if (dir[i] < 0.0 && u[free[i]] <= 1e-12 && (blocked < 0 || dir[i] < dir[blocked])) blocked = i;
        }
        if (blocked >= 0) {
          free.erase(free.begin() + blocked);
          continue;
        }
        slope = 0.0;
        reach = 1.0;
        for (int i = 0; i < k; ++i) {
          slope -= c[i] * dir[i];
          if (dir[i] < 0.0) reach = std::min(reach, -0.99 * u[free[i]] / dir[i]);
        }
        solved = true;
        break;
      }
      if (!solved || !(slope < 0.0) || -slope < 1e-300) break;
      double t = reach;
      bool moved = false;
      for (int halving = 0; halving < 60 && t > 0.0; ++halving, t *= 0.5) {
        trial = u;
        for (std::size_t i = 0; i < free.size(); ++i) trial[free[i]] = std::max(0.0, u[free[i]] + t * dir[i]);
        std::vector<double> tz;
        const double tf = dual_value(trial, &tz);
        bool accept = tf <= f + 1e-4 * t * slope;
        if (!accept && std::isfinite(tf) && tf <= f + 1e-15 * (1.0 + std::abs(f))) {
          // Below the resolution of f: step while the directional derivative stays negative.
          double derivative = 0.0;
          for (std::size_t i = 0; i < free.size(); ++i)
            for (int x = 0; x < nx_; ++x)
              if (p_[x] > 0.0) derivative -= dir[i] * p_[x] * weights_[x * nb_ + free[i]] / tz[x];
          accept = derivative <= 0.0;
        }
        if (accept) {
          u.swap(trial);
          z.swap(tz);
          f = tf;
          moved = true;
          break;
        }
      }
      if (!moved) break;
    }
    double s = 0.0;
    for (double v : u) s += v;
    for (double& v : u) v /= s;
    return u;
  }

  // Gaussian elimination with partial pivoting on an augmented dim x (dim+1) matrix.
  static bool solve_in_place(std::vector<double>& a, int dim) {
    const int w = dim + 1;
    for (int col = 0; col < dim; ++col) {
      int piv = col;
      for (int r = col + 1; r < dim; ++r)
        if (std::abs(a[r * w + col]) > std::abs(a[piv * w + col])) piv = r;
      if (std::abs(a[piv * w + col]) < 1e-300) return false;
      if (piv != col)
        for (int k = 0; k < w; ++k) std::swap(a[col * w + k], a[piv * w + k]);
      for (int r = 0; r < dim; ++r) {
        if (r == col) continue;
        const double f = a[r * w + col] / a[col * w + col];
        if (f == 0.0) continue;
        for (int k = col; k < w; ++k) a[r * w + k] -= f * a[col * w + k];
      }
    }
    for (int r = 0; r < dim; ++r) {
      a[r * w + dim] /= a[r * w + r];
      if (!std::isfinite(a[r * w + dim])) return false;
    }
    return true;
  }

  std::vector<double> p_;
  const DistortionSpec& spec_;
  double slope_;
  int nx_;
  int nb_;
  std::vector<double> weights_;
  std::vector<double> q_;
  Evaluation current_;
  int iterations_ = 0;
};

struct SlopeSolution {
  RDPoint point;
  std::vector<std::vector<double>> outputs;  // per-y output law (empty for null y)
};

inline void check_shapes(const JointPmf& q, const DistortionSpec& spec) {
  if (q.x_size() != spec.x_size())
    throw ValidationError("joint pmf and distortion table disagree on |X|");
}

// Rate-zero endpoint: per y, the single symbol minimizing E[d(X, xhat) | y].
inline SlopeSolution zero_slope(const JointPmf& q, const DistortionSpec& spec) {
  const int nx = q.x_size(), ny = q.y_size(), nb = spec.xhat_size();
  std::vector<double> table(static_cast<std::size_t>(nx) * ny * nb, 0.0);
  std::vector<std::vector<double>> outputs(ny);
  for (int y = 0; y < ny; ++y) {
    int best = 0;
    double best_cost = kInfinity;
    for (int b = 0; b < nb; ++b) {
      double cost = 0.0;
      for (int x = 0; x < nx; ++x) cost += q(x, y) * spec(x, b);
      if (cost < best_cost) {
        best_cost = cost;
        best = b;
      }
    }
    for (int x = 0; x < nx; ++x) table[(static_cast<std::size_t>(x) * ny + y) * nb + best] = 1.0;
    outputs[y].assign(nb, 0.0);
    outputs[y][best] = 1.0;
  }
  TestChannel channel(nx, ny, nb, std::move(table));
  RDPoint pt{0.0, expected_distortion(q, channel, spec), 0.0, channel, 0.0, 0, {}};
  pt.rate = conditional_mutual_information(q, pt.channel);
  return {std::move(pt), std::move(outputs)};
}

inline SlopeSolution solve_slope(const JointPmf& q, const DistortionSpec& spec, double slope,
                                 const RdOptions& opts,
                                 const std::vector<std::vector<double>>* warm = nullptr) {
  check_shapes(q, spec);
  if (std::isnan(slope) || slope < 0.0) throw ValidationError("slope must be >= 0");
  if (!(opts.tol > 0.0)) throw ValidationError("tolerance must be > 0");
  if (slope == 0.0) return zero_slope(q, spec);

  const int nx = q.x_size(), ny = q.y_size(), nb = spec.xhat_size();
  const auto qy = q.y_marginal();

  std::vector<std::optional<SliceSolver>> slices(ny);
  for (int y = 0; y < ny; ++y) {
    if (qy[y] <= 0.0) continue;
    const std::vector<double>* init = (warm && !(*warm)[y].empty()) ? &(*warm)[y] : nullptr;
    slices[y].emplace(q.conditional_given_y(y), spec, slope, init);
  }

  std::vector<double> trace;
  std::vector<double> last(ny, kInfinity);
  std::vector<bool> done(ny, false);
  int iterations = 0;
  double total_gap = 0.0;
  for (;;) {
    bool active = false;
    total_gap = 0.0;
    double total_objective = 0.0;
    for (int y = 0; y < ny; ++y) {
      if (!slices[y]) continue;
      auto& s = *slices[y];
      if (!done[y]) {
        const double obj = s.step();
        if (obj > last[y] + 1e-12 * std::max(1.0, std::abs(last[y])))
          throw std::logic_error("alternating minimization objective increased");
        last[y] = obj;
        if (s.gap() <= opts.tol) done[y] = true;
        else active = true;
      }
      total_gap += qy[y] * s.gap();
      total_objective += qy[y] * last[y];
    }
    ++iterations;
    if (opts.record_trace) trace.push_back(total_objective);
    if (!active) break;
    if (iterations >= opts.max_iterations)
      throw ConvergenceError("alternating minimization did not converge in " + std::to_string(iterations) +
                                 " iterations at slope " + std::to_string(slope) + "; objective gap " +
                                 std::to_string(total_gap),
                             total_gap);
  }

  std::vector<double> table(static_cast<std::size_t>(nx) * ny * nb, 0.0);
  std::vector<std::vector<double>> outputs(ny);
  for (int y = 0; y < ny; ++y) {
    for (int x = 0; x < nx; ++x)
      for (int b = 0; b < nb; ++b) {
        const std::size_t at = (static_cast<std::size_t>(x) * ny + y) * nb + b;
        table[at] = slices[y] ? slices[y]->channel(x, b) : (b == 0 ? 1.0 : 0.0);
      }
    if (slices[y]) outputs[y] = slices[y]->output();
  }
  TestChannel channel(nx, ny, nb, std::move(table));
  RDPoint pt{0.0, 0.0, slope, channel, total_gap, iterations, std::move(trace)};
  pt.rate = conditional_mutual_information(q, pt.channel);
  pt.distortion = expected_distortion(q, pt.channel, spec);
  return {std::move(pt), std::move(outputs)};
}

inline double minimum_distortion(const JointPmf& q, const DistortionSpec& spec) {
  double out = 0.0;
  for (int x = 0; x < q.x_size(); ++x) {
    const double m = spec.row_min(x);
    for (int y = 0; y < q.y_size(); ++y) out += q(x, y) * m;
  }
  return out;
}

inline std::vector<double> slope_grid() {
  std::vector<double> g;
  for (int k = 0; k <= 64; ++k) g.push_back(1e-4 * std::pow(10.0, 8.0 * k / 64.0));
  return g;
}

}  // namespace detail

// Point on the lower convex envelope of the (distortion, rate) region at slope lambda.
inline RDPoint rd_fixed_slope(const JointPmf& q, const DistortionSpec& spec, double lambda,
                              const RdOptions& opts = {}) {
  return detail::solve_slope(q, spec, lambda, opts).point;
}

// R_SI(q, delta): min I(X; Xhat | Y) over channels with E d <= delta.
inline RDPoint rd_side_info(const JointPmf& q, const DistortionSpec& spec, const Rational& level,
                            const RdOptions& opts = {}) {
  const Rational delta = canonical(level);
  detail::check_shapes(q, spec);
  if (sgn(delta) < 0) throw ValidationError("distortion level must be >= 0");
  const double target = to_double(delta);
  if (!std::isfinite(target)) throw ValidationError("distortion level out of range");
  constexpr double kEdge = 1e-12;

  auto zero = detail::zero_slope(q, spec);
  if (target >= zero.point.distortion - kEdge) return std::move(zero.point);

  const double dmin = detail::minimum_distortion(q, spec);
  if (target < dmin - kEdge)
    throw InfeasibleDistortion("distortion " + to_string(delta) + " below the minimum achievable " +
                               std::to_string(dmin));
  auto top = detail::solve_slope(q, spec, kInfinity, opts);
  if (target <= top.point.distortion + kEdge) return std::move(top.point);

  // Distortion is non-increasing in the slope. Locate a bracket on the grid.
  const auto grid = detail::slope_grid();
  std::map<double, detail::SlopeSolution> memo;
  const std::vector<std::vector<double>>* warm = nullptr;
  auto at = [&](double slope) -> const detail::SlopeSolution& {
    auto it = memo.find(slope);
    if (it != memo.end()) return it->second;
    auto sol = detail::solve_slope(q, spec, slope, opts, warm);
    return memo.emplace(slope, std::move(sol)).first->second;
  };

  const detail::SlopeSolution* lo = &zero;  // distortion >= target
  const detail::SlopeSolution* hi = &top;   // distortion <= target
  int left = 0, right = static_cast<int>(grid.size()) - 1;
  if (at(grid[left]).point.distortion <= target) {
    hi = &at(grid[left]);
  } else if (at(grid[right]).point.distortion > target) {
    lo = &at(grid[right]);
    for (double s = grid[right] * 10.0; s <= 1e12; s *= 10.0) {
      warm = &lo->outputs;
      const auto& cand = at(s);
      if (cand.point.distortion <= target) {
        hi = &cand;
        break;
      }
      lo = &cand;
    }
  } else {
    while (right - left > 1) {
      const int mid = (left + right) / 2;
      if (at(grid[mid]).point.distortion > target) left = mid;
      else right = mid;
    }
    lo = &at(grid[left]);
    hi = &at(grid[right]);
  }

  // Both bracketing points lie on the envelope, whose supporting lines there have
  // slopes -a and -b, so the chord between them overestimates the curve by at most
  // (b - a) * (D_lo - D_hi). Refine in log-slope with Illinois steps until that
  // certificate drops below tol, falling back to bisection when progress stalls.
  double weight_lo = 1.0, weight_hi = 1.0;
  int last_replaced = 0;  // -1 lo, +1 hi
  std::vector<double> widths;
  for (int it = 0; it < 200; ++it) {
    const double a = lo->point.slope, b = hi->point.slope;
    const double d_lo = lo->point.distortion, d_hi = hi->point.distortion;
    if (std::abs(d_lo - target) <= kEdge || std::abs(d_hi - target) <= kEdge) break;
    double mid;
    if (a == 0.0) {
      if (b * (d_lo - d_hi) <= opts.tol) break;
      mid = 0.5 * b;
    } else if (std::isinf(b)) {
      mid = a * 10.0;
      if (mid > 1e12) break;
    } else {
      if ((b - a) * (d_lo - d_hi) <= opts.tol || b / a - 1.0 < 1e-13) break;
      const double ua = std::log(a), ub = std::log(b), width = ub - ua;
      widths.push_back(width);
      const bool stalled = widths.size() >= 3 && width > 0.5 * widths[widths.size() - 3];
      double u = 0.5 * (ua + ub);
      if (!stalled) {
        const double ga = weight_lo * (d_lo - target), gb = weight_hi * (d_hi - target);
        const double cand = (ua * gb - ub * ga) / (gb - ga);
        if (std::isfinite(cand)) u = std::clamp(cand, ua + 0.01 * width, ub - 0.01 * width);
      } else {
        widths.clear();
      }
      mid = std::exp(u);
    }
    warm = &lo->outputs;
    const auto& m = at(mid);
    if (m.point.distortion > target) {
      lo = &m;
      weight_lo = 1.0;
      if (last_replaced == -1) weight_hi *= 0.5;
      last_replaced = -1;
    } else {
      hi = &m;
      weight_hi = 1.0;
      if (last_replaced == 1) weight_lo *= 0.5;
      last_replaced = 1;
    }
  }

  const RDPoint& p_lo = lo->point;
  const RDPoint& p_hi = hi->point;
  if (std::abs(p_hi.distortion - target) <= kEdge) return p_hi;
  if (std::abs(p_lo.distortion - target) <= kEdge && p_lo.distortion <= target + kEdge) return p_lo;

  // Time-share the two envelope points so the expected distortion equals the target.
  const double span = p_lo.distortion - p_hi.distortion;
  const double weight = span > 0.0 ? (target - p_hi.distortion) / span : 0.0;
  RDPoint out{0.0, 0.0, std::isinf(p_hi.slope) ? p_lo.slope : p_hi.slope,
              p_lo.channel.mix(p_hi.channel, std::clamp(weight, 0.0, 1.0)),
              std::max(p_lo.objective_gap, p_hi.objective_gap), p_lo.iterations + p_hi.iterations, {}};
  out.rate = conditional_mutual_information(q, out.channel);
  out.distortion = expected_distortion(q, out.channel, spec);
  return out;
}

// Envelope points at slope 0, the geometric slope grid, and the minimum-distortion end.
inline RDCurve rd_curve(const JointPmf& q, const DistortionSpec& spec, const RdOptions& opts = {}) {
  RDCurve curve;
  auto zero = detail::zero_slope(q, spec);
  curve.points.push_back(zero.point);
  const std::vector<std::vector<double>>* warm = nullptr;
  std::vector<detail::SlopeSolution> sols;
  sols.reserve(70);
  for (double s : detail::slope_grid()) {
    sols.push_back(detail::solve_slope(q, spec, s, opts, warm));
    warm = &sols.back().outputs;
    curve.points.push_back(sols.back().point);
  }
  curve.points.push_back(detail::solve_slope(q, spec, kInfinity, opts).point);
  std::stable_sort(curve.points.begin(), curve.points.end(), [](const RDPoint& a, const RDPoint& b) {
    if (a.distortion != b.distortion) return a.distortion < b.distortion;
    return a.slope > b.slope;
  });
  return curve;
}

struct CurveCheck {
  bool non_increasing = true;
  bool convex = true;
  double worst_violation = 0.0;
};

// Rate must not rise with distortion, and every finite-slope point must lie on a
// supporting line: R_j + s_i D_j >= R_i + s_i D_i - gap_i for all j.
inline CurveCheck check_curve(const RDCurve& curve, double slack = 1e-12) {
  CurveCheck out;
  const auto& pts = curve.points;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double rise = pts[i + 1].rate - pts[i].rate;
    const double allowed = pts[i].objective_gap + pts[i + 1].objective_gap + slack;
    if (rise > allowed) {
      out.non_increasing = false;
      out.worst_violation = std::max(out.worst_violation, rise - allowed);
    }
  }
  for (const auto& a : pts) {
    if (std::isinf(a.slope)) continue;
    const double base = a.rate + a.slope * a.distortion;
    for (const auto& b : pts) {
      const double value = b.rate + a.slope * b.distortion;
      const double deficit = base - a.objective_gap - slack - value;
      if (deficit > 0.0) {
        out.convex = false;
        out.worst_violation = std::max(out.worst_violation, deficit);
      }
    }
  }
  // Pairwise slopes over well-separated points must be non-decreasing.
  std::vector<const RDPoint*> sep;
  for (const auto& p : pts)
    if (sep.empty() || p.distortion - sep.back()->distortion >= 1e-6) sep.push_back(&p);
  for (std::size_t i = 0; i + 2 < sep.size(); ++i) {
    const auto *a = sep[i], *b = sep[i + 1], *c = sep[i + 2];
    const double s1 = (b->rate - a->rate) / (b->distortion - a->distortion);
    const double s2 = (c->rate - b->rate) / (c->distortion - b->distortion);
    const double err = 2.0 * (a->objective_gap + b->objective_gap + c->objective_gap + slack) /
                       std::min(b->distortion - a->distortion, c->distortion - b->distortion);
    if (s1 > s2 + err) {
      out.convex = false;
      out.worst_violation = std::max(out.worst_violation, s1 - s2 - err);
    }
  }
  return out;
}

}  // namespace deception
