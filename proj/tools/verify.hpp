#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "commands.hpp"

namespace deception::cli {

struct CheckOutcome {
  bool pass = true;
  double measured = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

namespace detail {

// Largest blocklength whose joint sequence space stays within `limit` pairs.
inline int largest_n(const JointPmf& p, int cap, double limit) {
  int n = 0;
  while (n < cap && std::pow(static_cast<double>(p.cells()), n + 1) <= limit) ++n;
  return n;
}

inline EncoderDecoder random_table_code(int n, int nx, int ny, int nb, std::size_t bins, std::mt19937_64& rng) {
  std::map<std::pair<Sequence, Sequence>, std::size_t> enc;
  std::map<std::pair<std::size_t, Sequence>, Sequence> dec;
  for (const auto& y : all_sequences(ny, n)) {
    for (const auto& x : all_sequences(nx, n)) enc[{x, y}] = 1 + rng() % bins;
    for (std::size_t i = 1; i <= bins; ++i) {
      Sequence c(n);
      for (auto& v : c) v = static_cast<Symbol>(rng() % static_cast<std::uint64_t>(nb));
      dec[{i, y}] = c;
    }
  }
  return EncoderDecoder(
      n, bins, [enc](const Sequence& x, const Sequence& y) { return enc.at({x, y}); },
      [dec](std::size_t i, const Sequence& y) { return dec.at({i, y}); });
}

}  // namespace detail

// Cross-module consistency checks on one model at one distortion level.
inline Report run_verify(const Inputs& in, const Model& m) {
  const auto deltas = levels(in, m);
  const Rational delta = deltas.front();
  const bool degenerate = delta >= m.spec.d_max();
  Report r = start_report("verify", m);
  r.parameters = {{"delta", to_string(canonical(delta))}, {"seed", in.seed}, {"threads", in.threads}};
  r.table.columns = {"check", "status", "measured", "tolerance", "detail"};

  ExponentOptions eopts;
  eopts.seed = in.seed;
  eopts.threads = std::max(1u, in.threads);
  if (in.starts > 0) eopts.starts = in.starts;
  std::optional<ExponentResult> exponent;
  auto star = [&]() -> const ExponentResult& {
    if (!exponent) exponent = deception_exponent(m.p, m.spec, delta, eopts);
    return *exponent;
  };

  std::vector<std::pair<std::string, std::function<CheckOutcome()>>> checks;

  checks.emplace_back("rd-curve-shape", [&] {
    const auto check = check_curve(rd_curve(m.p, m.spec));
    return CheckOutcome{check.non_increasing && check.convex, check.worst_violation, 1e-12,
                        "rate non-increasing and convex in distortion"};
  });

  checks.emplace_back("ba-monotone", [&] {
    RdOptions opts;
    opts.record_trace = true;
    double worst = 0.0;
    for (double s : deception::detail::slope_grid()) {
      const auto pt = rd_fixed_slope(m.p, m.spec, s, opts);
      for (std::size_t i = 1; i < pt.objective_trace.size(); ++i)
        worst = std::max(worst, pt.objective_trace[i] - pt.objective_trace[i - 1]);
    }
    return CheckOutcome{worst <= 1e-12, worst, 1e-12, "largest per-iteration rise of the Lagrangian over the slope grid"};
  });

  checks.emplace_back("exponent-certified", [&] {
    const auto& e = star();
    const double gap = e.exponent - e.lower_bound;
    const bool pass = gap >= -1e-9 && gap <= 1e-4 && e.exponent <= e.upper_bound + 1e-12;
    return CheckOutcome{pass, gap, 1e-4, "E* = " + fixed(e.exponent) + " nats against the dual lower bound"};
  });

  checks.emplace_back("oracle-fast-naive", [&] {
    int mismatches = 0, compared = 0;
    std::string skipped;
    for (int n = 1; n <= 4; ++n) {
      try {
        const auto fast = optimal_deception_prob(m.p, m.spec, delta, n, oracle_options(in, OracleMode::fast));
        const auto naive = optimal_deception_prob(m.p, m.spec, delta, n, oracle_options(in, OracleMode::naive));
        mismatches += fast.p_star != naive.p_star;
        ++compared;
      } catch (const BudgetError&) {
        skipped = ", naive enumeration over budget from n = " + std::to_string(n);
        break;
      }
    }
    return CheckOutcome{mismatches == 0 && compared > 0, static_cast<double>(mismatches), 0.0,
                        "exact p_star mismatches over n = 1.." + std::to_string(compared) + skipped};
  });

  checks.emplace_back("finite-n-sandwich", [&] {
    const auto& e = star();
    double slack = kInfinity;
    int last = 1;
    for (int n = 2; n <= 8; ++n) {
      try {
        const auto res = optimal_deception_prob(m.p, m.spec, delta, n, oracle_options(in, OracleMode::fast));
        slack = std::min(slack, res.exponent_n - (e.exponent - 4.0 * std::log(n + 1.0) / n));
        last = n;
      } catch (const BudgetError&) {
        break;
      }
    }
    return CheckOutcome{last >= 2 && slack >= -1e-9, slack, 0.0,
                        "min over n = 2.." + std::to_string(last) + " of exponent_n - (E* - 4 ln(n+1)/n)"};
  });

  checks.emplace_back("types-partition", [&] {
    const auto law = m.p.exact_mass();
    const int a = static_cast<int>(law.size());
    const int max_n = std::max(1, detail::largest_n(m.p, 8, 1e6));
    int failures = 0;
    for (int n = 1; n <= max_n; ++n) {
      Integer sizes = 0;
      Rational total = 0;
      for (const auto& t : enumerate_types(n, a)) {
        const Integer size = type_class_size(t);
        sizes += size;
        total += Rational(size) * type_probability_exact(t, law);
      }
      Integer power;
      mpz_ui_pow_ui(power.get_mpz_t(), static_cast<unsigned long>(a), static_cast<unsigned long>(n));
      failures += (sizes != power) + (canonical(total) != 1);
    }
    return CheckOutcome{failures == 0, static_cast<double>(failures), 0.0,
                        "joint types, n = 1.." + std::to_string(max_n) + ": class sizes and total probability exact"};
  });

  checks.emplace_back("pigeonhole", [&] {
    std::mt19937_64 rng(in.seed);
    const int max_n = std::max(1, std::min(3, detail::largest_n(m.p, 3, 4096)));
    int failures = 0;
    const int trials = 20;
    for (int t = 0; t < trials; ++t) {
      const int n = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(max_n));
      const std::size_t bins = 1 + rng() % 8;
      const auto code = detail::random_table_code(n, m.p.x_size(), m.p.y_size(), m.spec.xhat_size(), bins, rng);
      const auto attack = construct_attack(code, m.p, m.spec, delta);
      const Rational total = covered_mass(code, m.p, m.spec, delta);
      const Rational best = *std::max_element(attack.bin_masses.begin(), attack.bin_masses.end());
      failures += (best * static_cast<long>(bins) < total) + (attack.success != best);
    }
    return CheckOutcome{failures == 0, static_cast<double>(failures), 0.0,
                        std::to_string(trials) + " random codes: max bin >= covered / bins and attack = max bin"};
  });

  checks.emplace_back("attack-below-oracle", [&] {
    const int n = std::max(1, std::min(4, detail::largest_n(m.p, 4, 1e5)));
    const auto rd = rd_side_info(m.p, m.spec, delta);
    const auto best = optimal_deception_prob(m.p, m.spec, delta, n, oracle_options(in, OracleMode::fast));
    Rational worst_margin;
    bool first = true;
    for (double rate : {0.0, rd.rate, rd.rate + 0.25}) {
      const auto code = random_rd_code(m.p, m.spec, delta, n, rate, in.seed);
      const auto attack = construct_attack(code, m.p, m.spec, delta);
      const Rational margin = best.p_star - attack.success;
      if (first || margin < worst_margin) worst_margin = margin;
      first = false;
    }
    return CheckOutcome{sgn(worst_margin) >= 0, to_double(worst_margin), 0.0,
                        "p_star - attack success at n = " + std::to_string(n) + " for three code rates"};
  });

  checks.emplace_back("monte-carlo", [&] {
    const int n = std::max(1, std::min(6, detail::largest_n(m.p, 6, 1e6)));
    const auto res = optimal_deception_prob(m.p, m.spec, delta, n, oracle_options(in, OracleMode::fast));
    const auto f = oracle_strategy(res);
    const double p = to_double(res.p_star);
    const std::uint64_t trials = 200000;
    const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
    double z = 0.0;
    int attempt = 0;
    for (; attempt < 2; ++attempt) {  // one reseeded retry
      const auto mc = monte_carlo_success_rate(f, m.p, m.spec, delta, trials, in.seed + attempt);
      z = se > 0.0 ? std::abs(mc.estimate - p) / se : (mc.estimate == p ? 0.0 : kInfinity);
      if (z <= 3.0) break;
    }
    return CheckOutcome{z <= 3.0, z, 3.0,
                        "standard errors from p_star at n = " + std::to_string(n) + ", " +
                            std::to_string(trials) + " trials" + (attempt > 0 ? ", after one reseed" : "")};
  });

  int failed = 0;
  for (const auto& [name, run] : checks) {
    CheckOutcome c;
    try {
      c = run();
    } catch (const Error& e) {
      c = CheckOutcome{false, kInfinity, 0.0, std::string("error: ") + e.what()};
    }
    failed += !c.pass;
    r.table.add({name, std::string(c.pass ? "PASS" : "FAIL"), c.measured, c.tolerance, c.detail});
  }
  r.ok = failed == 0;
  r.extras["degenerate"] = degenerate;
  r.summary = "verify: " + m.name + ", delta " + to_string(canonical(delta)) + ": " +
              std::to_string(checks.size() - failed) + "/" + std::to_string(checks.size()) + " checks passed" +
              (degenerate ? " (delta >= d_max: every adversary succeeds)" : "");
  return r;
}

}  // namespace deception::cli
