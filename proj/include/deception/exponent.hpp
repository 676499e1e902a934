#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "deception/prob_core.hpp"
#include "deception/rd_side_info.hpp"
#include "deception/types.hpp"

namespace deception {

struct ExponentOptions {
  int starts = 64;                // Dirichlet(1) random starts
  std::uint64_t seed = 20240229;
  double tol = 1e-6;              // stopping tolerance on the objective
  int max_iterations = 200;       // per local descent
  double fd_step = 1e-5;          // central-difference step
  int grid_resolution = 4;        // coarse simplex grid spacing 1/resolution
  int grid_seeds = 4;             // best grid points used as starts
  int grid_max_cells = 6;         // grid seeding only for |X||Y| up to this
  unsigned threads = 1;
  RdOptions rd{1e-10, 10000, false};
  std::vector<JointPmf> extra_starts;  // e.g. warm starts
};

struct StartSummary {
  std::string origin;  // "P", "tilted", "warm", "feasible", "dirichlet", "grid"
  int index = 0;
  double initial = kInfinity;
  double final_value = kInfinity;
  int iterations = 0;
  bool converged = false;  // false: iteration cap reached (stagnation)
  std::vector<double> path;  // objective after each accepted step
  std::vector<double> point;  // final Q over all cells
};

struct ExponentResult {
  double exponent = kInfinity;  // nats
  JointPmf argmin_q{Alphabet(1), Alphabet(1), {1.0}};
  double rd_component = 0.0;
  double kl_component = 0.0;
  double upper_bound = kInfinity;  // objective at Q = P
  double lower_bound = 0.0;        // tilted bound; exponent - lower_bound bounds the error
  std::vector<StartSummary> optimizer_trace;
  std::vector<JointPmf> ties;  // distinct near-optimal Q from other starts
  int stagnated = 0;
};

// D(q || p) + R_SI(q, delta); +inf when q leaves p's support or delta is below the
// smallest distortion q allows.
inline double exponent_objective(const JointPmf& q, const JointPmf& p, const DistortionSpec& spec,
                                 const Rational& delta, const RdOptions& rd = {}) {
  if (!q.same_shape(p)) throw ValidationError("q and p must share alphabets");
  const double kl = kl_divergence(q, p);
  if (std::isinf(kl)) return kInfinity;
  try {
    return kl + rd_side_info(q, spec, delta, rd).rate;
  } catch (const InfeasibleDistortion&) {
    return kInfinity;
  }
}

namespace detail {

// Euclidean projection onto the probability simplex (sort-based).
inline std::vector<double> project_to_simplex(const std::vector<double>& v) {
  std::vector<double> u(v);
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumulative = 0.0, theta = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    cumulative += u[k];
    const double t = (cumulative - 1.0) / static_cast<double>(k + 1);
    if (u[k] - t > 0.0) theta = t;
  }
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::max(v[i] - theta, 0.0);
  double s = std::accumulate(out.begin(), out.end(), 0.0);
  for (double& x : out) x /= s;
  return out;
}

// The objective as a function of the mass on p's support cells.
class SupportObjective {
 public:
  SupportObjective(const JointPmf& p, const DistortionSpec& spec, const Rational& delta, const RdOptions& rd)
      : p_(p), spec_(spec), delta_(delta), rd_(rd) {
    for (std::size_t i = 0; i < p.cells(); ++i)
      if (p.mass()[i] > 0.0) cells_.push_back(i);
  }

  std::size_t dim() const { return cells_.size(); }
  const std::vector<std::size_t>& cells() const { return cells_; }

  JointPmf embed(const std::vector<double>& u) const {
    std::vector<double> m(p_.cells(), 0.0);
    double s = std::accumulate(u.begin(), u.end(), 0.0);
    for (std::size_t k = 0; k < cells_.size(); ++k) m[cells_[k]] = u[k] / s;
    return JointPmf(p_.x_alphabet(), p_.y_alphabet(), std::move(m));
  }

  std::vector<double> restrict(const JointPmf& q) const {
    std::vector<double> u;
    for (auto c : cells_) u.push_back(q.mass()[c]);
    double s = std::accumulate(u.begin(), u.end(), 0.0);
    if (!(s > 0.0)) throw ValidationError("start has no mass on the support of p");
    for (double& v : u) v /= s;
    return u;
  }

  // Accepts any non-negative vector with positive sum (homogeneous extension).
  double operator()(const std::vector<double>& v) const {
    for (double x : v)
      if (x < 0.0) return kInfinity;
    return exponent_objective(embed(v), p_, spec_, delta_, rd_);
  }

 private:
  const JointPmf& p_;
  const DistortionSpec& spec_;
  Rational delta_;
  RdOptions rd_;
  std::vector<std::size_t> cells_;
};

inline std::vector<double> numeric_gradient(const SupportObjective& f, const std::vector<double>& u, double fu,
                                            double h) {
  std::vector<double> g(u.size(), 0.0), v(u);
  for (std::size_t i = 0; i < u.size(); ++i) {
    v[i] = u[i] + h;
    const double up = f(v);
    double down = kInfinity;
    if (u[i] >= h) {
      v[i] = u[i] - h;
      down = f(v);
    }
    v[i] = u[i];
    if (std::isfinite(up) && std::isfinite(down)) g[i] = (up - down) / (2.0 * h);
    else if (std::isfinite(up)) g[i] = (up - fu) / h;
    else if (std::isfinite(down)) g[i] = (fu - down) / h;
  }
  return g;
}

inline constexpr int kStallWindow = 25;

inline double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Spectral projected gradient (Barzilai-Borwein steps, non-monotone Armijo search
// over the last ten values) from one start. Keeps the best point visited and stops
// once it is within reach of `target`, a certified lower bound plus the tolerance.
inline void local_descent(const SupportObjective& f, std::vector<double> u, const ExponentOptions& opts,
                          StartSummary& out, double target = -kInfinity) {
  const std::size_t m = u.size();
  double fu = f(u);
  out.initial = fu;
  std::vector<double> best = u;
  double fbest = fu;
  auto finish = [&] {
    out.final_value = fbest;
    const auto q = f.embed(best);
    out.point.assign(q.mass().begin(), q.mass().end());
  };
  if (!std::isfinite(fu) || fu <= target) {
    out.converged = true;
    finish();
    return;
  }
  auto g = numeric_gradient(f, u, fu, opts.fd_step);
  std::vector<double> recent{fu}, trial(m), d(m);
  // Step along -u*(g - mean_u g), the gradient preconditioned by the inverse KL
  // curvature, then project back onto the simplex.
  auto projected_step = [&](double alpha) {
    double c = 0.0;
    for (std::size_t i = 0; i < m; ++i) c += u[i] * g[i];
    for (std::size_t i = 0; i < m; ++i) trial[i] = u[i] - alpha * std::max(u[i], 1e-12) * (g[i] - c);
    auto p = project_to_simplex(trial);
    for (std::size_t i = 0; i < m; ++i) p[i] -= u[i];
    return p;
  };
  double alpha = 1.0;
  int last_gain = 0;
  double gain_reference = fu;
  for (int it = 0; it < opts.max_iterations; ++it) {
    if (max_abs(projected_step(1.0)) < 1e-10) {
      out.converged = true;
      break;
    }
    d = projected_step(alpha);
    double gd = 0.0;
    for (std::size_t i = 0; i < m; ++i) gd += g[i] * d[i];
    const double reference = *std::max_element(recent.begin(), recent.end());
    bool accepted = false;
    double t = 1.0, fnext = fu;
    std::vector<double> next(m);
    for (int k = 0; k < 40 && gd < 0.0; ++k, t *= 0.5) {
      for (std::size_t i = 0; i < m; ++i) next[i] = std::max(0.0, u[i] + t * d[i]);
      fnext = f(next);
      if (std::isfinite(fnext) && fnext <= reference + 1e-4 * t * gd) {
        accepted = true;
        break;
      }
    }
    out.iterations = it + 1;
    if (!accepted) {
      out.converged = true;  // the gradient is no longer informative at this resolution
      break;
    }
    const auto gnext = numeric_gradient(f, next, fnext, opts.fd_step);
    double ss = 0.0, sy = 0.0, moved = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double s_i = next[i] - u[i];
      ss += s_i * s_i / std::max(0.5 * (u[i] + next[i]), 1e-12);
      sy += s_i * (gnext[i] - g[i]);
      moved = std::max(moved, std::abs(s_i));
    }
    alpha = sy > 0.0 ? std::clamp(ss / sy, 1e-10, 1e10) : 1e10;
    u.swap(next);
    g = gnext;
    fu = fnext;
    out.path.push_back(fu);
    if (fu < fbest) {
      fbest = fu;
      best = u;
    }
    if (fbest <= target) {
      out.converged = true;
      break;
    }
    if (fbest < gain_reference - opts.tol) {
      gain_reference = fbest;
      last_gain = it;
    }
    if (it - last_gain >= kStallWindow) break;  // no progress: reported as not converged
    recent.push_back(fu);
    if (recent.size() > 10) recent.erase(recent.begin());
    if (moved < 1e-12) {
      out.converged = true;
      break;
    }
  }
  finish();
}

inline double uniform_open(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

inline std::vector<double> dirichlet_one(std::size_t dim, std::mt19937_64& rng) {
  std::vector<double> u(dim);
  double s = 0.0;
  for (double& v : u) s += (v = -std::log(uniform_open(rng)));
  for (double& v : u) v /= s;
  return u;
}

}  // namespace detail

// Lower bound from tilting: for every s >= 0,
//   E*(delta) >= -s delta - ln sum_y max_xhat sum_x P(x,y) exp(-s d(x,xhat)),
// maximized over s by golden section (the right side is concave in s). The
// distribution reached by the maximizing tilt is returned as a candidate Q.
struct TiltedBound {
  double value = 0.0;
  double tilt = 0.0;
  JointPmf q{Alphabet(1), Alphabet(1), {1.0}};
};

namespace detail {

// Some Q on p's support must be able to meet delta.
inline void check_reachable(const JointPmf& p, const DistortionSpec& spec, const Rational& delta) {
  const auto px = p.x_marginal();
  double floor = kInfinity;
  for (int x = 0; x < p.x_size(); ++x)
    if (px[x] > 0.0) floor = std::min(floor, spec.row_min(x));
  if (to_double(delta) < floor - 1e-12)
    throw InfeasibleDistortion("distortion " + to_string(delta) + " is below every achievable minimum");
}

class TiltedDual {
 public:
  TiltedDual(const JointPmf& p, const DistortionSpec& spec, double delta) : p_(p), spec_(spec), delta_(delta) {}

  // ln of sum_x P(x,y) exp(-s d(x,b)), or -inf when that sum is empty.
  double log_mass(int y, int b, double s) const {
    double shift = kInfinity;
    for (int x = 0; x < p_.x_size(); ++x)
      if (p_(x, y) > 0.0) shift = std::min(shift, spec_(x, b));
    if (std::isinf(shift)) return -kInfinity;
    double sum = 0.0;
    for (int x = 0; x < p_.x_size(); ++x)
      if (p_(x, y) > 0.0) sum += p_(x, y) * std::exp(-s * (spec_(x, b) - shift));
    return std::log(sum) - s * shift;
  }

  int best_reconstruction(int y, double s) const {
    int best = 0;
    double v = -kInfinity;
    for (int b = 0; b < spec_.xhat_size(); ++b) {
      const double l = log_mass(y, b, s);
      if (l > v) v = l, best = b;
    }
    return best;
  }

  double value(double s) const {
    std::vector<double> terms;
    for (int y = 0; y < p_.y_size(); ++y) {
      double v = -kInfinity;
      for (int b = 0; b < spec_.xhat_size(); ++b) v = std::max(v, log_mass(y, b, s));
      if (std::isfinite(v)) terms.push_back(v);
    }
    const double top = *std::max_element(terms.begin(), terms.end());
    double sum = 0.0;
    for (double t : terms) sum += std::exp(t - top);
    return -s * delta_ - (top + std::log(sum));
  }

  // The tilted joint law P(x,y) W(b|y) exp(-s d(x,b)) / Z with W a point mass on
  // the best reconstruction per y at tilt s; returns its (x,y) marginal and E d.
  std::pair<std::vector<double>, double> tilted(double s, double probe) const {
    const int nx = p_.x_size(), ny = p_.y_size();
    std::vector<double> q(p_.cells(), 0.0);
    double z = 0.0, d = 0.0;
    std::vector<double> logs;
    for (int y = 0; y < ny; ++y) logs.push_back(log_mass(y, best_reconstruction(y, probe), s));
    double top = -kInfinity;
    for (double l : logs) top = std::max(top, l);
    for (int y = 0; y < ny; ++y) {
      if (!std::isfinite(logs[y])) continue;
      const int b = best_reconstruction(y, probe);
      for (int x = 0; x < nx; ++x) {
        if (p_(x, y) <= 0.0) continue;
        const double w = p_(x, y) * std::exp(-s * spec_(x, b) - top);
        q[p_.index(x, y)] += w;
        z += w;
        d += w * spec_(x, b);
      }
    }
    for (double& v : q) v /= z;
    return {q, d / z};
  }

 private:
  const JointPmf& p_;
  const DistortionSpec& spec_;
  double delta_;
};

}  // namespace detail

inline TiltedBound tilted_lower_bound(const JointPmf& p, const DistortionSpec& spec, const Rational& delta) {
  if (p.x_size() != spec.x_size()) throw ValidationError("joint pmf and distortion table disagree on |X|");
  if (sgn(delta) < 0) throw ValidationError("distortion level must be >= 0");
  detail::check_reachable(p, spec, delta);
  const detail::TiltedDual dual(p, spec, to_double(delta));
  // Golden section in u = ln(1 + s); the objective is unimodal in s and u is monotone in s.
  double hi = 1.0;
  while (hi < 1e8 && dual.value(2.0 * hi) > dual.value(hi)) hi *= 2.0;
  hi = std::min(2.0 * hi, 1e8);
  double a = 0.0, b = std::log1p(hi);
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - ratio * (b - a), d = a + ratio * (b - a);
  double fc = dual.value(std::expm1(c)), fd = dual.value(std::expm1(d));
  for (int it = 0; it < 200 && b - a > 1e-14 * (1.0 + b); ++it) {
    if (fc >= fd) {
      b = d, d = c, fd = fc;
      c = b - ratio * (b - a);
      fc = dual.value(std::expm1(c));
    } else {
      a = c, c = d, fc = fd;
      d = a + ratio * (b - a);
      fd = dual.value(std::expm1(d));
    }
  }
  TiltedBound out;
  out.tilt = std::expm1(0.5 * (a + b));
  out.value = std::max(dual.value(0.0), dual.value(out.tilt));
  if (dual.value(0.0) >= dual.value(out.tilt)) out.tilt = 0.0;
  out.value = std::max(out.value, 0.0);

  // At a tie in the best reconstruction the two one-sided choices straddle delta;
  // mix them so the tilted law meets the distortion level.
  const double s = out.tilt;
  auto [q_lo, d_lo] = dual.tilted(s, s * (1.0 - 1e-7));
  auto [q_hi, d_hi] = dual.tilted(s, s * (1.0 + 1e-7) + 1e-12);
  const double target = to_double(delta);
  double theta = 0.0;
  if (std::abs(d_hi - d_lo) > 1e-15) theta = std::clamp((target - d_lo) / (d_hi - d_lo), 0.0, 1.0);
  else theta = d_hi <= target ? 1.0 : 0.0;
  std::vector<double> q(q_lo.size());
  for (std::size_t i = 0; i < q.size(); ++i) q[i] = (1.0 - theta) * q_lo[i] + theta * q_hi[i];
  out.q = JointPmf(p.x_alphabet(), p.y_alphabet(), q);
  return out;
}

// E*(delta) = min_Q D(Q||P) + R_SI(Q, delta), by multi-start projected descent. The
// value is the best objective found, an upper bound on the true minimum.
inline ExponentResult deception_exponent(const JointPmf& p, const DistortionSpec& spec, const Rational& delta,
                                         const ExponentOptions& opts = {}) {
  if (p.x_size() != spec.x_size()) throw ValidationError("joint pmf and distortion table disagree on |X|");
  if (sgn(delta) < 0) throw ValidationError("distortion level must be >= 0");
  if (opts.starts < 0 || opts.max_iterations < 1 || !(opts.tol > 0.0) || !(opts.fd_step > 0.0))
    throw ValidationError("invalid optimizer options");

  detail::check_reachable(p, spec, delta);

  detail::SupportObjective f(p, spec, delta, opts.rd);
  const std::size_t m = f.dim();

  struct Start {
    std::string origin;
    int index;
    std::vector<double> u;
  };
  std::vector<Start> starts;
  starts.push_back({"P", 0, f.restrict(p)});
  const auto tilted = tilted_lower_bound(p, spec, delta);
  starts.push_back({"tilted", 0, f.restrict(tilted.q)});
  for (std::size_t k = 0; k < opts.extra_starts.size(); ++k)
    starts.push_back({"warm", static_cast<int>(k), f.restrict(opts.extra_starts[k])});

  // If P itself cannot meet delta, add P conditioned on the symbols that can.
  if (!std::isfinite(f(starts[0].u))) {
    std::vector<double> u(m, 0.0);
    for (std::size_t k = 0; k < m; ++k) {
      const auto x = static_cast<Symbol>(f.cells()[k] / static_cast<std::size_t>(p.y_size()));
      if (spec.row_min(x) <= to_double(delta) + 1e-12) u[k] = p.mass()[f.cells()[k]];
    }
    starts.push_back({"feasible", 0, u});
  }

  std::mt19937_64 rng(opts.seed);
  for (int k = 0; k < opts.starts; ++k) starts.push_back({"dirichlet", k, detail::dirichlet_one(m, rng)});

  if (p.cells() <= static_cast<std::size_t>(opts.grid_max_cells) && opts.grid_seeds > 0 && m > 1) {
    std::vector<std::pair<double, std::vector<double>>> grid;
    for (const auto& t : enumerate_types(opts.grid_resolution, static_cast<int>(m))) {
      std::vector<double> u(m);
      for (std::size_t k = 0; k < m; ++k) u[k] = static_cast<double>(t[static_cast<int>(k)]) / opts.grid_resolution;
      const double v = f(u);
      if (std::isfinite(v)) grid.emplace_back(v, std::move(u));
    }
    std::stable_sort(grid.begin(), grid.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (int k = 0; k < opts.grid_seeds && k < static_cast<int>(grid.size()); ++k)
      starts.push_back({"grid", k, grid[k].second});
  }

  std::vector<StartSummary> summaries(starts.size());
  for (std::size_t k = 0; k < starts.size(); ++k) {
    summaries[k].origin = starts[k].origin;
    summaries[k].index = starts[k].index;
  }
  const double target = tilted.value + opts.tol;
  const unsigned workers = std::max(1u, std::min<unsigned>(opts.threads, static_cast<unsigned>(starts.size())));
  if (workers == 1) {
    for (std::size_t k = 0; k < starts.size(); ++k) detail::local_descent(f, starts[k].u, opts, summaries[k], target);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        try {
          for (std::size_t k = w; k < starts.size(); k += workers) detail::local_descent(f, starts[k].u, opts, summaries[k], target);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    for (auto& t : pool) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  ExponentResult out;
  out.upper_bound = summaries[0].initial;
  out.lower_bound = tilted.value;
  std::size_t best = 0;
  for (std::size_t k = 0; k < summaries.size(); ++k) {
    if (!summaries[k].converged) ++out.stagnated;
    if (summaries[k].final_value < summaries[best].final_value) best = k;
  }
  if (!std::isfinite(summaries[best].final_value))
    throw InfeasibleDistortion("no start reached a feasible distribution");

  out.argmin_q = JointPmf(p.x_alphabet(), p.y_alphabet(), summaries[best].point);
  out.kl_component = kl_divergence(out.argmin_q, p);
  out.rd_component = rd_side_info(out.argmin_q, spec, delta, opts.rd).rate;
  out.exponent = out.kl_component + out.rd_component;
  if (out.exponent > out.upper_bound + 1e-9) throw std::logic_error("optimizer ended above the Q = P objective");

  for (std::size_t k = 0; k < summaries.size(); ++k) {
    if (k == best || summaries[k].final_value > summaries[best].final_value + opts.tol) continue;
    double l1 = 0.0;
    for (std::size_t i = 0; i < summaries[k].point.size(); ++i)
      l1 += std::abs(summaries[k].point[i] - summaries[best].point[i]);
    if (l1 <= 1e-2) continue;
    bool seen = false;
    for (const auto& t : out.ties) {
      double d = 0.0;
      for (std::size_t i = 0; i < t.cells(); ++i) d += std::abs(t.mass()[i] - summaries[k].point[i]);
      seen = seen || d <= 1e-2;
    }
    if (!seen) out.ties.emplace_back(p.x_alphabet(), p.y_alphabet(), summaries[k].point);
  }
  out.optimizer_trace = std::move(summaries);
  return out;
}

// Element-wise deception_exponent. Levels are solved in ascending order and each
// run also starts from the previous argmin, which keeps the curve non-increasing.
inline std::vector<ExponentResult> exponent_sweep(const JointPmf& p, const DistortionSpec& spec,
                                                  const std::vector<Rational>& deltas,
                                                  const ExponentOptions& opts = {}) {
  std::vector<std::size_t> order(deltas.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return deltas[a] < deltas[b]; });
  std::vector<ExponentResult> out(deltas.size());
  ExponentOptions local = opts;
  for (std::size_t idx : order) {
    out[idx] = deception_exponent(p, spec, deltas[idx], local);
    local.extra_starts = opts.extra_starts;
    local.extra_starts.push_back(out[idx].argmin_q);
  }
  return out;
}

}  // namespace deception
