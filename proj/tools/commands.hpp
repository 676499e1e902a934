#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "deception/deception.hpp"
#include "report.hpp"

namespace deception::cli {

inline constexpr std::uint64_t kDefaultSeed = 20240229;

struct Inputs {
  std::string model_path;
  std::vector<std::string> deltas;
  std::vector<int> ns;
  int starts = 64;
  std::uint64_t seed = kDefaultSeed;
  double tol = 0.0;  // 0: the module default
  unsigned threads = 1;
  std::string mode = "fast";
  bool force = false;
  std::uint64_t trials = 100000;
  double rate = 0.0;
  std::string action;
  int alphabet = 0;  // 0: take it from the model when one is given
};

inline double bits(double nats) { return nats_to_bits(nats); }

inline std::vector<Rational> levels(const Inputs& in, const Model& m) {
  std::vector<Rational> out;
  for (const auto& s : in.deltas) {
    Rational r;
    try {
      r = parse_rational(s);
    } catch (const ValidationError& e) {
      throw ValidationError("--delta: " + std::string(e.what()));
    }
    if (sgn(r) < 0) throw ValidationError("--delta: distortion level must be >= 0");
    out.push_back(r);
  }
  if (out.empty()) {
    if (!m.delta) throw ValidationError("no --delta given and the model file has no delta");
    out.push_back(*m.delta);
  }
  return out;
}

inline std::vector<int> blocklengths(const Inputs& in) {
  if (in.ns.empty()) throw ValidationError("--n is required");
  for (int n : in.ns)
    if (n < 1) throw ValidationError("--n: blocklength must be >= 1");
  return in.ns;
}

inline Report start_report(const std::string& command, const Model& m) {
  Report r;
  r.command = command;
  r.model = m.name;
  return r;
}

inline OrderedJson delta_list(const std::vector<Rational>& ds) {
  OrderedJson out = OrderedJson::array();
  for (const auto& d : ds) out.push_back(to_string(canonical(d)));
  return out;
}

inline OrderedJson pmf_json(const JointPmf& q) {
  OrderedJson rows = OrderedJson::array();
  for (int x = 0; x < q.x_size(); ++x) {
    OrderedJson row = OrderedJson::array();
    for (int y = 0; y < q.y_size(); ++y) row.push_back(json_number(q(x, y)));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Report run_exponent(const Inputs& in, const Model& m) {
  const auto deltas = levels(in, m);
  ExponentOptions opts;
  if (in.starts < 0) throw ValidationError("--starts must be >= 0");
  opts.starts = in.starts;
  opts.seed = in.seed;
  if (in.tol > 0.0) opts.tol = in.tol;
  opts.threads = std::max(1u, in.threads);

  Report r = start_report("exponent", m);
  r.parameters = {{"delta", delta_list(deltas)}, {"starts", opts.starts}, {"seed", opts.seed},
                  {"tol", opts.tol},             {"threads", opts.threads}};
  r.table.columns = {"delta",  "exponent_nats",       "exponent_bits",      "kl_nats",
                     "rd_nats", "lower_bound_nats", "upper_bound_nats", "stagnated_starts"};
  const auto results = exponent_sweep(m.p, m.spec, deltas, opts);
  OrderedJson details = OrderedJson::array();
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& e = results[i];
    r.table.add({exact(deltas[i]), e.exponent, bits(e.exponent), e.kl_component, e.rd_component, e.lower_bound,
                 e.upper_bound, static_cast<std::int64_t>(e.stagnated)});
    OrderedJson starts = OrderedJson::array();
    for (const auto& s : e.optimizer_trace)
      starts.push_back({{"origin", s.origin},
                        {"index", s.index},
                        {"initial_nats", json_number(s.initial)},
                        {"final_nats", json_number(s.final_value)},
                        {"iterations", s.iterations},
                        {"converged", s.converged}});
    details.push_back({{"delta", to_string(canonical(deltas[i]))},
                       {"argmin_q", pmf_json(e.argmin_q)},
                       {"near_optimal_ties", e.ties.size()},
                       {"starts", std::move(starts)}});
  }
  r.extras["results"] = std::move(details);
  const auto& first = results.front();
  r.summary = "exponent: " + m.name + ", delta " + to_string(canonical(deltas.front())) + ": E* = " +
              fixed(first.exponent) + " nats (" + fixed(bits(first.exponent)) + " bits), certified within " +
              fixed(std::max(0.0, first.exponent - first.lower_bound), 9) + " nats";
  if (results.size() > 1) r.summary += ", " + std::to_string(results.size()) + " levels in the sweep";
  return r;
}

inline Report run_rd_curve(const Inputs& in, const Model& m) {
  RdOptions opts;
  if (in.tol > 0.0) opts.tol = in.tol;
  Report r = start_report("rd-curve", m);
  r.parameters = {{"tol", opts.tol}};
  r.table.columns = {"lambda", "distortion", "rate_nats", "rate_bits"};
  std::vector<RDPoint> points;
  if (in.deltas.empty()) {
    points = rd_curve(m.p, m.spec, opts).points;
    const auto check = check_curve(RDCurve{points});
    r.extras["curve_check"] = {{"non_increasing", check.non_increasing},
                               {"convex", check.convex},
                               {"worst_violation", json_number(check.worst_violation)}};
    r.ok = check.non_increasing && check.convex;
    r.summary = "rd-curve: " + m.name + ": " + std::to_string(points.size()) + " points, rate from " +
                fixed(points.front().rate) + " to " + fixed(points.back().rate) + " nats, " +
                (r.ok ? "convex and non-increasing" : "shape check FAILED");
  } else {
    const auto deltas = levels(in, m);
    r.parameters["delta"] = delta_list(deltas);
    for (const auto& d : deltas) points.push_back(rd_side_info(m.p, m.spec, d, opts));
    r.summary = "rd-curve: " + m.name + ", delta " + to_string(canonical(deltas.front())) +
                ": R_SI = " + fixed(points.front().rate) + " nats (" + fixed(bits(points.front().rate)) + " bits)";
  }
  for (const auto& p : points) r.table.add({p.slope, p.distortion, p.rate, bits(p.rate)});
  return r;
}

inline OracleOptions oracle_options(const Inputs& in, OracleMode mode) {
  OracleOptions o;
  o.mode = mode;
  o.force = in.force;
  return o;
}

inline Report run_oracle(const Inputs& in, const Model& m) {
  if (in.mode != "fast" && in.mode != "naive" && in.mode != "both")
    throw ValidationError("--mode must be naive, fast or both");
  const auto deltas = levels(in, m);
  const auto ns = blocklengths(in);
  Report r = start_report("oracle", m);
  r.parameters = {{"delta", delta_list(deltas)}, {"n", ns}, {"mode", in.mode}, {"force", in.force}};
  r.table.columns = {"delta", "n", "mode", "p_star_exact", "p_star_prob", "exponent_nats", "exponent_bits",
                     "evaluations"};
  std::vector<OracleMode> modes;
  if (in.mode != "naive") modes.push_back(OracleMode::fast);
  if (in.mode != "fast") modes.push_back(OracleMode::naive);
  int mismatches = 0;
  for (const auto& d : deltas)
    for (int n : ns) {
      std::vector<Rational> seen;
      for (auto mode : modes) {
        const auto res = optimal_deception_prob(m.p, m.spec, d, n, oracle_options(in, mode));
        r.table.add({exact(d), static_cast<std::int64_t>(n), std::string(mode == OracleMode::fast ? "fast" : "naive"),
                     exact(res.p_star), to_double(res.p_star), res.exponent_n, bits(res.exponent_n),
                     to_string(res.evaluations)});
        seen.push_back(res.p_star);
      }
      if (seen.size() == 2 && seen[0] != seen[1]) ++mismatches;
    }
  const auto& last = r.table.rows.back();
  r.summary = "oracle: " + m.name + ", delta " + cell_text(last[0]) + ", n " + cell_text(last[1]) +
              ": p_star = " + cell_text(last[3]) + " (" + fixed(std::get<double>(last[4])) + "), exponent_n " +
              fixed(std::get<double>(last[5])) + " nats";
  if (modes.size() == 2) {
    r.ok = mismatches == 0;
    r.extras["modes_agree"] = r.ok;
    r.summary += r.ok ? ", naive and fast agree exactly" : ", naive and fast DISAGREE";
  }
  return r;
}

inline Report run_simulate(const Inputs& in, const Model& m) {
  const auto deltas = levels(in, m);
  const auto ns = blocklengths(in);
  if (in.trials < 1) throw ValidationError("--trials must be >= 1");
  Report r = start_report("simulate", m);
  r.parameters = {{"delta", delta_list(deltas)}, {"n", ns}, {"trials", in.trials}, {"seed", in.seed}};
  r.table.columns = {"delta", "n", "trials", "successes", "estimate_prob", "standard_error_prob", "p_star_prob",
                     "z_score"};
  for (const auto& d : deltas)
    for (int n : ns) {
      const auto res = optimal_deception_prob(m.p, m.spec, d, n, oracle_options(in, OracleMode::fast));
      const auto mc = monte_carlo_success_rate(oracle_strategy(res), m.p, m.spec, d, in.trials, in.seed);
      const double exact_p = to_double(res.p_star);
      const double z = mc.standard_error > 0.0 ? (mc.estimate - exact_p) / mc.standard_error
                                               : (mc.estimate == exact_p ? 0.0 : kInfinity);
      r.table.add({exact(d), static_cast<std::int64_t>(n), static_cast<std::int64_t>(mc.trials),
                   static_cast<std::int64_t>(mc.successes), mc.estimate, mc.standard_error, exact_p, z});
    }
  const auto& last = r.table.rows.back();
  r.summary = "simulate: " + m.name + ", delta " + cell_text(last[0]) + ", n " + cell_text(last[1]) + ": " +
              fixed(std::get<double>(last[4])) + " +- " + fixed(std::get<double>(last[5])) + " against p_star " +
              fixed(std::get<double>(last[6])) + " (z = " + fixed(std::get<double>(last[7]), 2) + ")";
  return r;
}

inline Report run_attack(const Inputs& in, const Model& m) {
  const auto deltas = levels(in, m);
  const auto ns = blocklengths(in);
  if (!(in.rate >= 0.0)) throw ValidationError("--rate must be >= 0 nats");
  Report r = start_report("attack", m);
  r.parameters = {{"delta", delta_list(deltas)}, {"n", ns}, {"rate_nats", in.rate}, {"seed", in.seed}};
  r.table.columns = {"delta",         "n",           "rate_nats",     "bins",          "chosen_bin",
                     "success_exact", "success_prob", "success_exponent_nats", "p_star_prob", "p_star_exponent_nats"};
  for (const auto& d : deltas)
    for (int n : ns) {
      const auto code = random_rd_code(m.p, m.spec, d, n, in.rate, in.seed);
      const auto attack = construct_attack(code, m.p, m.spec, d);
      const auto best = optimal_deception_prob(m.p, m.spec, d, n, oracle_options(in, OracleMode::fast));
      if (attack.success > best.p_star) throw std::logic_error("attack beats the optimal adversary");
      r.table.add({exact(d), static_cast<std::int64_t>(n), in.rate, static_cast<std::int64_t>(code.index_count()),
                   static_cast<std::int64_t>(attack.chosen_index), exact(attack.success), to_double(attack.success),
                   deception::detail::exponent_of(attack.success, n), to_double(best.p_star), best.exponent_n});
    }
  const auto& last = r.table.rows.back();
  r.summary = "attack: " + m.name + ", delta " + cell_text(last[0]) + ", n " + cell_text(last[1]) + ": bin " +
              cell_text(last[4]) + " of " + cell_text(last[3]) + " succeeds with " +
              fixed(std::get<double>(last[6])) + " against the optimum " + fixed(std::get<double>(last[8]));
  return r;
}

// Type with counts as close as possible to n * pmf (largest remainders).
inline TypeClass nearest_type(int n, const std::vector<Rational>& pmf) {
  std::vector<int> counts(pmf.size());
  std::vector<std::pair<Rational, std::size_t>> rest;
  int used = 0;
  for (std::size_t a = 0; a < pmf.size(); ++a) {
    const Rational target = pmf[a] * n;
    counts[a] = static_cast<int>(mpz_class(target.get_num() / target.get_den()).get_si());
    used += counts[a];
    rest.push_back({target - counts[a], a});
  }
  std::stable_sort(rest.begin(), rest.end(), [](const auto& l, const auto& r) { return l.first > r.first; });
  for (std::size_t k = 0; used < n; ++k, ++used) ++counts[rest[k % rest.size()].second];
  return TypeClass(std::move(counts));
}

inline std::vector<Rational> uniform_pmf(int size) { return std::vector<Rational>(size, Rational(1, size)); }

inline std::vector<Rational> x_marginal_exact(const JointPmf& p) {
  const auto mass = p.exact_mass();
  std::vector<Rational> out(p.x_size(), Rational(0));
  for (int x = 0; x < p.x_size(); ++x)
    for (int y = 0; y < p.y_size(); ++y) out[x] += mass[p.index(x, y)];
  return out;
}

inline std::string sequence_text(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + std::to_string(v[i]);
  return s;
}

inline Report run_types(const Inputs& in, const Model* m) {
  Report r;
  r.command = "types";
  if (m) r.model = m->name;
  r.parameters = {{"action", in.action}, {"seed", in.seed}};
  const int alphabet = in.alphabet > 0 ? in.alphabet : (m ? m->p.x_size() : 2);
  if (alphabet < 1) throw ValidationError("--alphabet must be >= 1");

  if (in.action == "demo-covering") {
    const int n = in.ns.empty() ? 6 : in.ns.front();
    const auto t = nearest_type(n, uniform_pmf(alphabet));
    auto members = type_class_members(t);
    std::mt19937_64 rng(in.seed);
    std::shuffle(members.begin(), members.end(), rng);
    members.resize((members.size() + 3) / 4);
    const auto cover = greedy_permutation_cover(members, t);
    r.parameters["n"] = n;
    r.parameters["alphabet"] = alphabet;
    r.table.columns = {"step", "permutation"};
    for (std::size_t k = 0; k < cover.permutations.size(); ++k)
      r.table.add({static_cast<std::int64_t>(k + 1), sequence_text(cover.permutations[k].image())});
    r.ok = static_cast<std::int64_t>(cover.permutations.size()) <= cover.bound;
    r.extras["type_counts"] = t.counts();
    r.extras["class_size"] = to_string(cover.class_size);
    r.extras["subset_size"] = cover.subset_size;
    r.extras["bound"] = cover.bound;
    r.summary = "types demo-covering: type (" + sequence_text(t.counts()) + "), |T| = " + to_string(cover.class_size) +
                ", |S| = " + std::to_string(cover.subset_size) + ": covered by " +
                std::to_string(cover.permutations.size()) + " permutations, bound " + std::to_string(cover.bound);
    return r;
  }

  if (in.action == "demo-neighborhood") {
    const int n = in.ns.empty() ? 6 : in.ns.front();
    const auto pmf = m && in.alphabet == 0 ? x_marginal_exact(m->p) : uniform_pmf(alphabet);
    const int size = static_cast<int>(pmf.size());
    const auto t = nearest_type(n, pmf);
    const auto members = type_class_members(t);
    const std::set<Sequence> base(members.begin(), members.end());
    r.parameters["n"] = n;
    r.parameters["alphabet"] = size;
    r.table.columns = {"radius", "neighborhood_size", "probability_exact", "probability_prob"};
    for (int l = 0; l <= n; ++l) {
      const auto hood = hamming_neighborhood(base, l, size);
      const Rational pr = set_probability(hood, pmf);
      r.table.add({static_cast<std::int64_t>(l), static_cast<std::int64_t>(hood.size()), exact(pr), to_double(pr)});
      if (hood.size() == sequence_count(size, n)) break;
    }
    r.extras["type_counts"] = t.counts();
    r.summary = "types demo-neighborhood: type (" + sequence_text(t.counts()) + ") has probability " +
                fixed(std::get<double>(r.table.rows.front()[3])) + "; its radius-" +
                cell_text(r.table.rows.back()[0]) + " neighborhood has probability " +
                fixed(std::get<double>(r.table.rows.back()[3]));
    return r;
  }

  if (in.action == "verify-bounds") {
    const int max_n = in.ns.empty() ? 8 : in.ns.front();
    std::vector<std::vector<Rational>> laws;
    if (m && in.alphabet == 0) {
      laws.push_back(m->p.exact_mass());  // joint law over the product alphabet
    } else {
      for (int a = 2; a <= 4; ++a) {
        std::vector<Rational> law;
        for (int k = 1; k <= a; ++k) law.emplace_back(2 * k, a * (a + 1));
        for (auto& v : law) v.canonicalize();
        laws.push_back(std::move(law));
      }
    }
    r.parameters["n_max"] = max_n;
    r.table.columns = {"alphabet", "n", "types", "class_sizes_sum_to_alphabet_power", "total_probability_exact",
                       "ball_bound_holds"};
    int failures = 0;
    for (const auto& law : laws) {
      const int a = static_cast<int>(law.size());
      for (int n = 1; n <= max_n; ++n) {
        Integer sizes = 0;
        Rational total = 0;
        const auto types = enumerate_types(n, a);
        for (const auto& t : types) {
          const Integer size = type_class_size(t);
          sizes += size;
          total += Rational(size) * type_probability_exact(t, law);
        }
        Integer power;
        mpz_ui_pow_ui(power.get_mpz_t(), static_cast<unsigned long>(a), static_cast<unsigned long>(n));
        bool ball = true;
        for (int l = 0; 2 * l <= n; ++l) ball = ball && hamming_ball_bound(n, l, a).holds;
        const bool partition = sizes == power;
        failures += !partition + (canonical(total) != 1) + !ball;
        r.table.add({static_cast<std::int64_t>(a), static_cast<std::int64_t>(n),
                     static_cast<std::int64_t>(types.size()), partition, exact(total), ball});
      }
    }
    r.ok = failures == 0;
    r.summary = "types verify-bounds: " + std::to_string(r.table.rows.size()) + " cases, " +
                (r.ok ? "all identities exact and all ball bounds hold" : std::to_string(failures) + " FAILED");
    return r;
  }

  throw ValidationError("types: unknown action '" + in.action +
                        "' (expected demo-covering, demo-neighborhood or verify-bounds)");
}

}  // namespace deception::cli
