// klsum command-line laboratory: single evaluations, randomized sweeps with
// CSV/JSON artifacts, the verification roster, and the two experiments.
// Exit codes: 0 success, 1 verification failure, 2 usage error.

#include <cstdio>
#include <cstdlib>
#include <numeric>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"

#include "klsum/arith.hpp"
#include "klsum/complete_sums.hpp"
#include "klsum/discrepancy.hpp"
#include "klsum/experiments.hpp"
#include "klsum/incomplete_sums.hpp"
#include "klsum/io.hpp"
#include "klsum/kloosterman.hpp"
#include "klsum/verify.hpp"

namespace {

using namespace klsum;

struct Common {
  std::string out;
  std::string format = "csv";
  std::string threads;  // empty: KLSUM_THREADS env, else 1
  u64 seed = 1;
};

int resolve_threads(const std::string& flag) {
  std::string s = flag;
  if (s.empty()) {
    const char* env = std::getenv("KLSUM_THREADS");
    s = env ? env : "1";
  }
  if (s == "auto") {
    const unsigned hc = std::thread::hardware_concurrency();
    return hc ? static_cast<int>(hc) : 1;
  }
  char* end = nullptr;
  const long v = std::strtol(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0' || v < 1)
    throw std::invalid_argument("threads: '" + s + "' is not a positive integer or 'auto'");
  return static_cast<int>(v);
}

void emit(const Common& c, const io::Table& t) {
  if (c.out.empty()) return;
  io::write_atomic(c.out, c.format == "json" ? io::json_text(t) : io::csv_text(t));
  std::printf("wrote %s (%zu rows)\n", c.out.c_str(), t.rows.size());
}

u64 draw(std::mt19937_64& rng, u64 n) { return rng() % n; }  // n > 0

std::string fd(double v) { return io::format_double(v); }

// ---- single evaluations ---------------------------------------------------

int cmd_kl2(const Common& c, i64 a, u64 q, bool table) {
  io::Table t;
  t.add_meta("command", "kl2");
  t.add_meta("a", a);
  t.add_meta("q", q);
  t.columns = {"a", "q", "value"};
  if (table) {
    const auto kt = kl_table(q);
    for (u64 r = 0; r < q; ++r)
      t.rows.push_back({std::to_string(r), std::to_string(q), fd(kt.values[r].real())});
    std::printf("kl2 table mod %llu: %llu values\n", static_cast<unsigned long long>(q),
                static_cast<unsigned long long>(q));
  } else {
    const double v = kl2(a, q).value.real();
    t.rows.push_back({std::to_string(a), std::to_string(q), fd(v)});
    std::printf("%.6f\n", v);
  }
  emit(c, t);
  return 0;
}

int cmd_delta(const Common& c, double X, u64 q, i64 a, double shape, int threads) {
  io::Table t;
  t.add_meta("command", "delta");
  t.add_meta("X", X);
  t.add_meta("q", q);
  t.add_meta("a", a);
  if (shape > 0.0) {
    t.add_meta("delta-shape", shape);
    const double v = delta_smooth(X, q, static_cast<u64>(detail::reduce_mod(a, q)),
                                  {WeightKind::kBump12, shape, 10.0}, threads);
    t.columns = {"X", "q", "a", "value"};
    t.rows.push_back({fd(X), std::to_string(q), std::to_string(a), fd(v)});
    std::printf("%s\n", fd(v).c_str());
  } else {
    const auto rec = delta(X, q, a);
    t.columns = {"X", "q", "a", "ap_sum", "coprime_sum", "exact", "delta", "trivial_scale"};
    t.rows.push_back({fd(X), std::to_string(q), std::to_string(a),
                      std::to_string(rec.ap_sum), std::to_string(rec.coprime_sum),
                      io::format_rational(rec.exact), fd(rec.delta), fd(rec.trivial_scale)});
    std::printf("%s\n", fd(rec.delta).c_str());
  }
  emit(c, t);
  return 0;
}

int cmd_avg_delta(const Common& c, u64 r, u64 s, double U, double X, i64 a, bool squares,
                  double eps, double shape, int threads) {
  const WeightSpec w{WeightKind::kBump12, shape, 10.0};
  const auto res = squares ? avg_delta_squares(r, s, U, X, a, w, threads)
                           : avg_delta_squarefree(r, s, U, X, a, w, threads);
  const auto rc = range_check(static_cast<double>(r), static_cast<double>(s), U, X, eps);
  io::Table t;
  t.add_meta("command", "avg-delta");
  t.add_meta("r", r);
  t.add_meta("s", s);
  t.add_meta("U", U);
  t.add_meta("X", X);
  t.add_meta("a", a);
  t.add_meta("squares", std::string(squares ? "1" : "0"));
  t.add_meta("eps", eps);
  t.add_meta("delta-shape", shape);
  t.columns = {"moduli", "lhs", "rhs", "ratio", "range_ok", "range_degenerate"};
  t.rows.push_back({std::to_string(res.moduli.size()), fd(res.lhs), fd(res.rhs),
                    fd(res.ratio), rc.all ? "1" : "0", rc.degenerate ? "1" : "0"});
  emit(c, t);
  std::printf("moduli %zu  lhs %s  rhs %s  ratio %s  range %s\n", res.moduli.size(),
              fd(res.lhs).c_str(), fd(res.rhs).c_str(), fd(res.ratio).c_str(),
              rc.all ? "ok" : (rc.degenerate ? "degenerate" : "violated"));
  return 0;
}

int cmd_ap_run(const Common& c, double X, double Q, double eps, i64 a, double B,
               int threads) {
  if (Q <= 0.0) Q = std::pow(X, 2.0 / 3.0);
  const auto rep = ap_equidistribution_run({X, Q, eps}, a, B, threads);
  io::Table t;
  t.add_meta("command", "ap-run");
  t.add_meta("X", X);
  t.add_meta("Q", Q);
  t.add_meta("eps", eps);
  t.add_meta("a", a);
  t.add_meta("B", B);
  t.add_meta("moduli_checked", rep.moduli_checked);
  t.add_meta("good_count", rep.good_count);
  t.add_meta("violators", rep.violators);
  t.add_meta("good_violators", rep.good_violators);
  t.add_meta("sqrt_eps_Q", rep.sqrt_eps_Q);
  t.add_meta("worst_excess", rep.worst_excess);
  t.columns = {"q", "delta", "threshold", "violator", "good"};
  for (const auto& row : rep.rows)
    t.rows.push_back({std::to_string(row.q), fd(row.delta), fd(row.threshold),
                      row.violator ? "1" : "0", row.good ? "1" : "0"});
  emit(c, t);
  std::printf(
      "moduli %llu  violators %llu (count/sqrt(eps)Q = %s)  good %llu  worst excess %s\n",
      static_cast<unsigned long long>(rep.moduli_checked),
      static_cast<unsigned long long>(rep.violators),
      fd(static_cast<double>(rep.violators) / rep.sqrt_eps_Q).c_str(),
      static_cast<unsigned long long>(rep.good_count), fd(rep.worst_excess).c_str());
  return 0;
}

int cmd_cubic(const Common& c, u64 X, bool paths, int threads) {
  const auto exp = binary_cubic_sum(X, threads);
  const CubicMainTerm mt =
      X >= 2 ? cubic_main_term(X)
             : CubicMainTerm{std::nan(""), std::nan(""), std::nan("")};
  u64 mismatches = 0;
  if (paths) {
    if (X > 200) throw std::invalid_argument("cubic: --paths requires X <= 200");
    if (cubic_sieve_path(X) != exp.lhs) ++mismatches;
    if (X <= 60 && cubic_factor_path(X) != exp.lhs) ++mismatches;
  }
  io::Table t;
  t.add_meta("command", "cubic");
  t.add_meta("X", X);
  t.columns = {"X", "lhs", "main_term", "ratio", "mt_direct", "mt_closed", "mt_rel_gap"};
  t.rows.push_back({std::to_string(X), std::to_string(exp.lhs), fd(exp.main_term),
                    fd(exp.ratio), fd(mt.direct), fd(mt.closed), fd(mt.rel_gap)});
  emit(c, t);
  std::printf("lhs %llu  main term %s  ratio %s%s\n",
              static_cast<unsigned long long>(exp.lhs), fd(exp.main_term).c_str(),
              fd(exp.ratio).c_str(),
              paths ? (mismatches ? "  PATHS DISAGREE" : "  paths agree") : "");
  return mismatches ? 1 : 0;
}

// ---- randomized sweeps ----------------------------------------------------

std::vector<u64> odd_primes_through(u64 lo, u64 hi) {
  std::vector<u64> v;
  for (u64 p = lo | 1; p <= hi; p += 2)
    if (is_prime(p)) v.push_back(p);
  return v;
}

int cmd_complete_sweep(const Common& c, u64 max_p, u64 count) {
  const auto primes = odd_primes_through(3, max_p);
  if (primes.empty()) throw std::invalid_argument("max-p: no odd primes at or below it");
  std::mt19937_64 rng(c.seed);
  io::Table t;
  t.add_meta("command", "complete-sweep");
  t.add_meta("max-p", max_p);
  t.add_meta("count", count);
  t.add_meta("seed", c.seed);
  t.columns = {"p",       "h",        "a1",      "a2",        "b1", "b2",
               "corr_re", "corr_im",  "corr_abs", "p_count",  "count_cap"};
  u64 violations = 0;
  double worst = 0.0;
  for (u64 i = 0; i < count; ++i) {
    const u64 p = primes[draw(rng, primes.size())];
    const i64 h = static_cast<i64>(draw(rng, p));
    const i64 a1 = static_cast<i64>(1 + draw(rng, p - 1));
    const i64 a2 = static_cast<i64>(1 + draw(rng, p - 1));
    const i64 b1 = static_cast<i64>(draw(rng, p));
    const i64 b2 = static_cast<i64>(draw(rng, p));
    const auto spec = spec_p2_four_factor(p, h, a1, a2, b1, b2);
    const auto corr = corr_sum_p2(spec);
    const u64 cnt = count_solution_fast(spec);
    const double scaled = static_cast<double>(p) * static_cast<double>(cnt);
    const u64 cap = 16 * (detail::gcd3(h, a1 * a1 - a2 * a2, p) + detail::gcd3(h, b1 - b2, p));
    const double excess = std::abs(corr.value) - scaled;
    worst = std::max(worst, excess);
    if (excess > 1e-6 || cnt > cap) ++violations;
    t.rows.push_back({std::to_string(p), std::to_string(h), std::to_string(a1),
                      std::to_string(a2), std::to_string(b1), std::to_string(b2),
                      fd(corr.value.real()), fd(corr.value.imag()), fd(std::abs(corr.value)),
                      fd(scaled), std::to_string(cap)});
  }
  emit(c, t);
  std::printf("%llu specs, %llu violations, worst |corr| - p*count = %s\n",
              static_cast<unsigned long long>(count),
              static_cast<unsigned long long>(violations), fd(worst).c_str());
  return violations ? 1 : 0;
}

int cmd_poisson_check(const Common& c, u64 count, u64 su_cap) {
  std::mt19937_64 rng(c.seed);
  const auto cube_free_draw = [&](u64 cap) {
    for (;;) {
      const u64 v = 1 + draw(rng, cap);
      if (detail::is_cube_free(v)) return v;
    }
  };
  io::Table t;
  t.add_meta("command", "poisson-check");
  t.add_meta("count", count);
  t.add_meta("su-cap", su_cap);
  t.add_meta("seed", c.seed);
  t.columns = {"s",         "u1",           "u2",           "a",       "b1",
               "b2",        "N",            "direct_re",    "direct_im", "completed_re",
               "completed_im", "rel_err", "certified"};
  u64 violations = 0;
  double worst = 0.0;
  for (u64 i = 0; i < count; ++i) {
    CompletionSpec sp;
    sp.u1 = cube_free_draw(20);
    sp.u2 = cube_free_draw(20);
    if (std::gcd(sp.u1, sp.u2) != 1) {
      --i;
      continue;
    }
    const u64 scap = su_cap / (sp.u1 * sp.u2);
    if (scap == 0) {
      --i;
      continue;
    }
    for (;;) {
      sp.s = cube_free_draw(scap);
      if (std::gcd(sp.s, sp.u1) == 1 && std::gcd(sp.s, sp.u2) == 1) break;
    }
    const u64 m = sp.s * sp.u1 * sp.u2;
    for (;;) {
      sp.a = static_cast<i64>(1 + draw(rng, m));
      if (std::gcd(static_cast<u64>(sp.a), m) == 1) break;
    }
    sp.b1 = static_cast<i64>(draw(rng, m));
    sp.b2 = static_cast<i64>(draw(rng, m));
    const double tt = 0.25 + 0.75 * static_cast<double>(draw(rng, 1024)) / 1023.0;
    sp.N = std::max(1.0, std::pow(static_cast<double>(m), tt));
    const auto res = poisson_complete(sp);
    const double rel = std::abs(res.direct - res.completed) / (1.0 + std::abs(res.direct));
    worst = std::max(worst, rel);
    if (!(rel < 1e-6) || !res.certified) ++violations;
    t.rows.push_back({std::to_string(sp.s), std::to_string(sp.u1), std::to_string(sp.u2),
                      std::to_string(sp.a), std::to_string(sp.b1), std::to_string(sp.b2),
                      fd(sp.N), fd(res.direct.real()), fd(res.direct.imag()),
                      fd(res.completed.real()), fd(res.completed.imag()), fd(rel),
                      res.certified ? "1" : "0"});
  }
  emit(c, t);
  std::printf("%llu specs, %llu violations, worst rel err %s\n",
              static_cast<unsigned long long>(count),
              static_cast<unsigned long long>(violations), fd(worst).c_str());
  return violations ? 1 : 0;
}

int cmd_qvdc_sweep(const Common& c, u64 count, u64 nmax) {
  std::mt19937_64 rng(c.seed);
  io::Table t;
  t.add_meta("command", "qvdc-sweep");
  t.add_meta("count", count);
  t.add_meta("N-max", nmax);
  t.add_meta("seed", c.seed);
  t.columns = {"r", "s", "u1", "u2", "c", "a", "N", "lhs_re", "lhs_im", "lhs_abs", "rhs",
               "ratio"};
  u64 violations = 0;
  double worst = 0.0;
  for (u64 i = 0; i < count; ++i) {
    QvdcSpec sp;
    sp.r = 1 + draw(rng, 8);
    const auto coprime_cube_free = [&](u64 cap, std::initializer_list<u64> others) {
      for (;;) {
        const u64 v = 1 + draw(rng, cap);
        if (!detail::is_cube_free(v)) continue;
        bool ok = true;
        for (const u64 o : others)
          if (std::gcd(v, o) != 1) ok = false;
        if (ok) return v;
      }
    };
    sp.s = coprime_cube_free(12, {sp.r});
    sp.u1 = coprime_cube_free(12, {sp.r, sp.s});
    sp.u2 = coprime_cube_free(12, {sp.r, sp.s, sp.u1});
    std::vector<u64> divs;
    for (u64 d = 1; d <= sp.r; ++d)
      if (sp.r % d == 0) divs.push_back(d);
    sp.c = divs[draw(rng, divs.size())];
    const u64 full = sp.r * sp.s * sp.u1 * sp.u2;
    for (;;) {
      sp.a = static_cast<i64>(1 + draw(rng, full));
      if (std::gcd(static_cast<u64>(sp.a), full) == 1) break;
    }
    sp.N = static_cast<double>(10 + draw(rng, nmax - 9));
    const auto res = qvdc_sum(sp);
    if (!std::isfinite(res.ratio)) ++violations;
    worst = std::max(worst, res.ratio);
    t.rows.push_back({std::to_string(sp.r), std::to_string(sp.s), std::to_string(sp.u1),
                      std::to_string(sp.u2), std::to_string(sp.c), std::to_string(sp.a),
                      fd(sp.N), fd(res.lhs.real()), fd(res.lhs.imag()),
                      fd(std::abs(res.lhs)), fd(res.rhs), fd(res.ratio)});
  }
  emit(c, t);
  std::printf("%llu specs, %llu non-finite ratios, max |lhs|/rhs = %s\n",
              static_cast<unsigned long long>(count),
              static_cast<unsigned long long>(violations), fd(worst).c_str());
  return violations ? 1 : 0;
}

int cmd_bilinear_sweep(const Common& c, u64 count, u64 cap) {
  std::mt19937_64 rng(c.seed);
  io::Table t;
  t.add_meta("command", "bilinear-sweep");
  t.add_meta("count", count);
  t.add_meta("cap", cap);
  t.add_meta("seed", c.seed);
  t.columns = {"r", "s",       "a",          "U",     "N",     "squares", "rule",
               "lhs_abs", "K_rhs", "K_rhs_display", "ratio", "support"};
  u64 violations = 0;
  double worst = 0.0;
  static const i64 kUnits[] = {17, 19, 23, 29, 31, 37};
  for (u64 i = 0; i < count; ++i) {
    BilinearSpec sp;
    sp.r = 1 + draw(rng, 6);
    for (;;) {
      sp.s = 1 + draw(rng, 6);
      if (detail::is_cube_free(sp.s) && std::gcd(sp.r, sp.s) == 1) break;
    }
    sp.U = static_cast<double>(u64{2} << draw(rng, 3));  // 2, 4, or 8
    sp.squares = (i % 2) == 1;
    const double umax = sp.squares ? std::sqrt(2.0 * sp.U) : 2.0 * sp.U;
    for (;;) {
      sp.a = kUnits[draw(rng, 6)];
      if (std::gcd(static_cast<u64>(sp.a), sp.r * sp.s) == 1 &&
          static_cast<double>(sp.a) > umax)
        break;
    }
    const u64 budget =
        cap / std::max<u64>(1, sp.r * sp.s * static_cast<u64>(sp.U * sp.U));
    sp.N = 1 + draw(rng, std::min<u64>(std::max<u64>(budget, 1), 400));
    sp.lambda = static_cast<LambdaRule>(i % 3);
    sp.seed = rng();
    const auto res = bilinear_sum(sp);
    if (!std::isfinite(res.ratio)) ++violations;
    worst = std::max(worst, res.ratio);
    t.rows.push_back({std::to_string(sp.r), std::to_string(sp.s), std::to_string(sp.a),
                      fd(sp.U), std::to_string(sp.N), sp.squares ? "1" : "0",
                      std::to_string(i % 3), fd(std::abs(res.lhs)), fd(res.K_rhs),
                      fd(res.K_rhs_display), fd(res.ratio),
                      std::to_string(res.support_size)});
  }
  emit(c, t);
  std::printf("%llu specs, %llu non-finite ratios, max |lhs|/K = %s\n",
              static_cast<unsigned long long>(count),
              static_cast<unsigned long long>(violations), fd(worst).c_str());
  return violations ? 1 : 0;
}

// ---- verification roster ---------------------------------------------------

struct VerifyScales {
  u64 max_p = 97;          // randomized-grid prime cap for the p^2 chain
  u64 pairs = 100'000;     // kl2 vs direct sample size
  u64 twist_pairs = 200;
  u64 p2_max = 100;
  u64 sweep_specs = 1'000;
  u64 parseval_specs = 100;
  u64 poisson_specs = 200;
  u64 poisson_cap = 10'000;
  u64 bilinear_cap = 1'000'000;
  u64 bilinear_random = 200;
};

int cmd_verify_all(const Common& c, const VerifyScales& vs, int threads) {
  std::vector<verify::CheckResult> results;
  {
    auto [agree, weil] = verify::check_kl2_direct_and_weil(2000, vs.pairs, c.seed);
    results.push_back(std::move(agree));
    results.push_back(std::move(weil));
  }
  results.push_back(verify::check_twist(vs.twist_pairs, 100, c.seed));
  results.push_back(verify::check_p2_closed(vs.p2_max));
  {
    auto out = verify::check_corr_p2_grids(31, vs.max_p, 40, c.seed);
    results.push_back(std::move(out.validation));
    results.push_back(std::move(out.exact_bound));
    results.push_back(std::move(out.count_bound));
  }
  {
    auto [sweep, necessity] = verify::check_corr_p_sweep(vs.sweep_specs, 199, c.seed);
    results.push_back(std::move(sweep));
    results.push_back(std::move(necessity));
  }
  results.push_back(verify::check_parseval(vs.parseval_specs, c.seed));
  results.push_back(verify::check_poisson(vs.poisson_specs, vs.poisson_cap, c.seed));
  results.push_back(verify::check_bilinear(vs.bilinear_cap, vs.bilinear_random, c.seed));
  results.push_back(verify::check_partition());
  results.push_back(verify::check_ratio_sweep(threads));
  results.push_back(verify::check_sharp_envelope());
  results.push_back(verify::check_good_moduli());
  results.push_back(verify::check_ap_equidistribution(threads));
  results.push_back(verify::check_cubic());

  io::Table t;
  t.add_meta("command", "verify-all");
  t.add_meta("max-p", vs.max_p);
  t.add_meta("pairs", vs.pairs);
  t.add_meta("seed", c.seed);
  t.columns = {"check", "pass", "checked", "violations", "worst", "note"};
  u64 failed = 0;
  std::printf("%-38s %-5s %10s %6s %12s %8s\n", "check", "pass", "checked", "viol",
              "worst", "elapsed");
  for (const auto& r : results) {
    if (!r.pass) ++failed;
    std::printf("%-38s %-5s %10llu %6llu %12.4g %7.2fs  %s\n", r.name.c_str(),
                r.pass ? "ok" : "FAIL", static_cast<unsigned long long>(r.checked),
                static_cast<unsigned long long>(r.violations), r.worst, r.elapsed_s,
                r.note.c_str());
    t.rows.push_back({r.name, r.pass ? "1" : "0", std::to_string(r.checked),
                      std::to_string(r.violations), fd(r.worst), r.note});
  }
  emit(c, t);
  std::printf("%zu checks, %llu failed\n", results.size(),
              static_cast<unsigned long long>(failed));
  return failed ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"exponential-sum and divisor-discrepancy laboratory"};
  app.require_subcommand(1);
  Common common;
  app.add_option("--out", common.out, "artifact path (atomic write)");
  app.add_option("--format", common.format, "artifact format")
      ->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--threads", common.threads,
                 "worker threads (positive integer or 'auto'; default KLSUM_THREADS or 1)");
  app.add_option("--seed", common.seed, "seed for randomized sweeps");

  i64 a = 1;
  u64 q = 3, r_fac = 1, s_fac = 1, X_int = 100, count = 200, max_p = 97,
      su_cap = 10'000, nmax = 300, cap = 1'000'000;
  double X = 100.0, Q = 0.0, U = 4.0, eps = 0.01, B = 2.0, shape = 0.0;
  bool table = false, squares = false, paths = false;
  VerifyScales vs;

  auto* kl2_cmd = app.add_subcommand("kl2", "evaluate a normalized Kloosterman sum");
  kl2_cmd->add_option("--a", a, "argument")->required();
  kl2_cmd->add_option("--q", q, "modulus")->required();
  kl2_cmd->add_flag("--table", table, "emit all residues mod q");

  auto* complete_cmd =
      app.add_subcommand("complete-sweep", "random prime-square correlation sums "
                                           "against the exact solution-count bound");
  complete_cmd->add_option("--max-p", max_p, "odd-prime cap");
  complete_cmd->add_option("--count", count, "number of random specs");

  auto* poisson_cmd = app.add_subcommand(
      "poisson-check", "completion identity on random admissible window sums");
  poisson_cmd->add_option("--count", count, "number of random specs");
  poisson_cmd->add_option("--su-cap", su_cap, "cap on the composite modulus");

  auto* qvdc_cmd = app.add_subcommand(
      "qvdc-sweep", "shifted-window correlation sums against the averaged envelope");
  qvdc_cmd->add_option("--count", count, "number of random specs");
  qvdc_cmd->add_option("--N-max", nmax, "window length cap");

  auto* bilinear_cmd = app.add_subcommand(
      "bilinear-sweep", "bilinear Kloosterman forms against both envelope readings");
  bilinear_cmd->add_option("--count", count, "number of random specs");
  bilinear_cmd->add_option("--cap", cap, "naive-cost cap r*s*U^2*N");

  auto* delta_cmd =
      app.add_subcommand("delta", "divisor discrepancy in one progression");
  delta_cmd->add_option("--X", X, "range endpoint")->required();
  delta_cmd->add_option("--q", q, "modulus")->required();
  delta_cmd->add_option("--a", a, "residue class")->required();
  delta_cmd->add_option("--delta-shape", shape,
                        "smooth-window edge width in (0,1]; 0 = exact sharp cutoff");

  auto* avg_cmd = app.add_subcommand(
      "avg-delta", "averaged smooth discrepancy over a family of moduli");
  avg_cmd->add_option("--r", r_fac, "fixed factor r")->required();
  avg_cmd->add_option("--s", s_fac, "fixed cube-free factor s")->required();
  avg_cmd->add_option("--U", U, "u-window scale")->required();
  avg_cmd->add_option("--X", X, "range endpoint")->required();
  avg_cmd->add_option("--a", a, "residue class");
  avg_cmd->add_flag("--squares", squares, "average over q = r s u^2");
  avg_cmd->add_option("--eps", eps, "range-check margin");
  avg_cmd->add_option("--delta-shape", shape, "smooth-window edge width (default 0.5)");

  auto* ap_cmd = app.add_subcommand(
      "ap-run", "divisor discrepancy across all moduli in a dyadic interval");
  ap_cmd->add_option("--X", X, "range endpoint")->required();
  ap_cmd->add_option("--Q", Q, "interval start (default X^(2/3))");
  ap_cmd->add_option("--eps", eps, "exponent margin")->required();
  ap_cmd->add_option("--a", a, "residue class");
  ap_cmd->add_option("--B", B, "log-power in the threshold");

  auto* cubic_cmd =
      app.add_subcommand("cubic", "divisor sum over the shifted binary cubic form");
  cubic_cmd->add_option("--X", X_int, "range endpoint")->required();
  cubic_cmd->add_flag("--paths", paths, "cross-check independent evaluation paths");

  auto* verify_cmd =
      app.add_subcommand("verify-all", "run the full verification roster");
  verify_cmd->add_option("--max-p", vs.max_p, "randomized-grid prime cap");
  verify_cmd->add_option("--pairs", vs.pairs, "kl2-vs-direct sample size");
  verify_cmd->add_option("--twist-pairs", vs.twist_pairs, "coprime factorization pairs");
  verify_cmd->add_option("--p2-max", vs.p2_max, "closed-form prime cap");
  verify_cmd->add_option("--sweep-specs", vs.sweep_specs, "mod-p sweep sample size");
  verify_cmd->add_option("--parseval-specs", vs.parseval_specs, "Plancherel sample size");
  verify_cmd->add_option("--poisson-specs", vs.poisson_specs, "completion sample size");
  verify_cmd->add_option("--poisson-cap", vs.poisson_cap, "completion modulus cap");
  verify_cmd->add_option("--bilinear-cap", vs.bilinear_cap, "bilinear naive-cost cap");
  verify_cmd->add_option("--bilinear-random", vs.bilinear_random,
                         "bilinear random sample size");

  for (auto* sub : {kl2_cmd, complete_cmd, poisson_cmd, qvdc_cmd, bilinear_cmd,
                    delta_cmd, avg_cmd, ap_cmd, cubic_cmd, verify_cmd})
    sub->fallthrough();

  int rc = 0;
  kl2_cmd->callback([&] { rc = cmd_kl2(common, a, q, table); });
  complete_cmd->callback([&] { rc = cmd_complete_sweep(common, max_p, count); });
  poisson_cmd->callback([&] { rc = cmd_poisson_check(common, count, su_cap); });
  qvdc_cmd->callback([&] { rc = cmd_qvdc_sweep(common, count, nmax); });
  bilinear_cmd->callback([&] { rc = cmd_bilinear_sweep(common, count, cap); });
  delta_cmd->callback([&] {
    rc = cmd_delta(common, X, q, a, shape, resolve_threads(common.threads));
  });
  avg_cmd->callback([&] {
    const double sh = shape > 0.0 ? shape : 0.5;
    rc = cmd_avg_delta(common, r_fac, s_fac, U, X, a, squares, eps, sh,
                       resolve_threads(common.threads));
  });
  ap_cmd->callback([&] {
    rc = cmd_ap_run(common, X, Q, eps, a, B, resolve_threads(common.threads));
  });
  cubic_cmd->callback([&] {
    rc = cmd_cubic(common, X_int, paths, resolve_threads(common.threads));
  });
  verify_cmd->callback([&] {
    rc = cmd_verify_all(common, vs, resolve_threads(common.threads));
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return rc;
}
