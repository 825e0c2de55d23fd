// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "hca/agents.hpp"
#include "hca/config.hpp"
#include "hca/environments.hpp"
#include "hca/errors.hpp"
#include "hca/harness.hpp"
#include "hca/identities.hpp"
#include "hca/oracle.hpp"
#include "hca/probe.hpp"

#ifndef HCA_CONFIG_DIR
#define HCA_CONFIG_DIR "configs"
#endif

using namespace hca;

namespace {

// Tolerances and budgets.
constexpr double kIdentityTol = 1e-9;
constexpr double kIdentityMaxSeconds = 60.0;
constexpr std::size_t kIdentityMdps = 100;
constexpr std::uint64_t kIdentityFamilySeed = 2019;

constexpr std::size_t kUnbiasedSamples = 1'000'000;
constexpr double kUnbiasedSe = 3.0;
constexpr double kUnbiasedMaxSeconds = 120.0;

constexpr double kShortcutOptimalGap = 0.05;
constexpr double kProbeMinLongProb = 0.9;
constexpr double kProbeMagnitudeFraction = 0.9;

constexpr double kBootstrapBaselineMax = 0.2;
constexpr double kBootstrapHcaMin = 0.8;

constexpr std::size_t kNoiseSamples = 10'000;
constexpr double kNoiseVarianceFactor = 1.1;
constexpr double kNoiseSe = 3.0;
constexpr double kNoiseBeta = 0.9;
constexpr double kNoiseGoodProb = 0.3;

constexpr double kDynamicsFraction = 0.9;
constexpr double kDynamicsEarly = 0.2;  // leading share of the training budget

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

ExperimentConfig config(const char* name) { return load_config(std::string(HCA_CONFIG_DIR) + "/" + name); }

const MethodCurve& curve_of(const RunResult& r, Algorithm m) {
  for (const auto& c : r.curves)
    if (c.method == m) return c;
  throw ConfigError("method missing from run");
}

double mean_of(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

// Sample variance and the standard error of that variance.
std::pair<double, double> variance_with_se(const std::vector<double>& v) {
  const double m = mean_of(v);
  double m2 = 0.0, m4 = 0.0;
  for (double x : v) {
    const double d = (x - m) * (x - m);
    m2 += d;
    m4 += d * d;
  }
  const double n = static_cast<double>(v.size());
  m2 /= n;
  m4 /= n;
  return {m2, std::sqrt(std::max(0.0, m4 - m2 * m2) / n)};
}

// 1 ------------------------------------------------------------------------
Outcome identity_suite() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto rows = run_identity_suite(kIdentityFamilySeed, kIdentityMdps, {1.0, 0.9, 0.5}, kIdentityTol);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  bool ok = secs < kIdentityMaxSeconds;
  double worst = 0.0;
  std::size_t checked = 0;
  for (const auto& r : rows) {
    ok = ok && r.passed && r.n_checked >= kIdentityMdps;
    worst = std::max(worst, r.max_discrepancy);
    checked += r.n_checked;
  }
  return {ok, fmt("%zu identities, %zu checks, max discrepancy %.2e, %.2fs", rows.size(), checked, worst, secs)};
}

// 2 ------------------------------------------------------------------------
// Three states: 0 decides, 1 decides again, 2 absorbs. Both actions reach
// every successor and every reward atom, so return supports agree across
// actions.
TabularMDP unbiasedness_mdp() {
  TabularMDP mdp(3, 2);
  mdp.p(0, 0, 1) = 0.7;
  mdp.p(0, 0, 2) = 0.3;
  mdp.p(0, 1, 1) = 0.4;
  mdp.p(0, 1, 2) = 0.6;
  mdp.reward_spec(0, 0) = RewardSpec::finite({0.0, 1.0}, {0.8, 0.2});
  mdp.reward_spec(0, 1) = RewardSpec::finite({0.0, 1.0}, {0.3, 0.7});
  for (ActionId a = 0; a < 2; ++a) mdp.p(1, a, 2) = 1.0;
  mdp.reward_spec(1, 0) = RewardSpec::finite({-1.0, 2.0}, {0.6, 0.4});
  mdp.reward_spec(1, 1) = RewardSpec::finite({-1.0, 2.0}, {0.25, 0.75});
  mdp.make_absorbing(2);
  mdp.n_observations = 3;
  mdp.discount = 0.9;
  mdp.horizon = 2;
  mdp.validate();
  return mdp;
}

Outcome unbiasedness() {
  const auto t0 = std::chrono::steady_clock::now();
  const TabularMDP mdp = unbiasedness_mdp();
  SoftmaxPolicy pi(3, 2);
  const double l0[] = {0.4, -0.3}, l1[] = {-0.6, 0.2};
  pi.set_logits(0, l0);
  pi.set_logits(1, l1);
  const OracleSolution sol = solve_values(mdp, pi);

  AgentConfig cfg;
  cfg.gamma = mdp.discount;
  StateHindsightTable hs(3, 2, mdp.discount);
  load_state_hindsight(hs, observation_hindsight(mdp, pi, truncated_geometric_weights(mdp.discount, 8)), pi);
  RewardModel rhat(3, 2);
  for (StateId x = 0; x < 3; ++x)
    for (ActionId a = 0; a < 2; ++a) rhat(x, a) = mdp.mean_reward(x, a);
  ValueTable values(3);

  // Every return atom lands in its own bin.
  const ReturnDistribution dist = exact_return_distribution(mdp, pi);
  ReturnHindsightTable hz(3, 2, ReturnBinner(40000, -2.0, 4.0), 1e-12);
  load_return_hindsight(hz, dist, mdp, pi);

  using Estimator = std::function<std::vector<double>(const Trajectory&)>;
  const std::vector<std::pair<const char*, Estimator>> estimators{
      {"all-actions", [&](const Trajectory& t) { return state_hca_gradient(t, pi, hs, values, rhat, cfg); }},
      {"return", [&](const Trajectory& t) { return return_hca_gradient(t, pi, hz, cfg); }},
      {"return-baseline", [&](const Trajectory& t) { return return_baseline_gradient(t, pi, hz, cfg); }},
  };
  const std::size_t dim = 3 * 2;
  std::vector<std::vector<double>> sum(estimators.size(), std::vector<double>(dim, 0.0)), sq = sum;
  RunStreams rng(derive_seed(7, 0));
  for (std::size_t i = 0; i < kUnbiasedSamples; ++i) {
    const Trajectory t = sample_trajectory(mdp, pi, rng);
    for (std::size_t e = 0; e < estimators.size(); ++e) {
      const auto g = estimators[e].second(t);
      for (std::size_t j = 0; j < dim; ++j) {
        sum[e][j] += g[j];
        sq[e][j] += g[j] * g[j];
      }
    }
  }
  bool ok = true;
  double worst_z = 0.0;
  std::string bad;
  const double n = static_cast<double>(kUnbiasedSamples);
  for (std::size_t e = 0; e < estimators.size(); ++e) {
    for (std::size_t j = 0; j < dim; ++j) {
      const double m = sum[e][j] / n;
      const double se = std::sqrt(std::max(0.0, sq[e][j] / n - m * m) / n);
      const double err = std::abs(m - sol.gradient[j]);
      const double z = se > 0.0 ? err / se : (err < 1e-12 ? 0.0 : std::numeric_limits<double>::infinity());
      worst_z = std::max(worst_z, z);
      if (z > kUnbiasedSe) {
        ok = false;
        bad += fmt(" %s[%zu]", estimators[e].first, j);
      }
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  ok = ok && secs < kUnbiasedMaxSeconds;
  return {ok, fmt("worst |mean-exact|/SE %.2f over 3x%zu coordinates, %.1fs%s", worst_z, dim, secs,
                  bad.empty() ? "" : (" outside:" + bad).c_str())};
}

// 3 ------------------------------------------------------------------------
Outcome shortcut_curves() {
  const ExperimentConfig cfg = config("shortcut.conf");
  const RunResult r = run_experiment(cfg);
  const auto& hca = curve_of(r, Algorithm::StateHCA).mean;
  const auto& pg = curve_of(r, Algorithm::BaselinePG).mean;
  // Optimal: SHORT straight away pays the step penalty and then the goal reward.
  const double optimal = cfg.shortcut.step_penalty + cfg.shortcut.goal_reward;
  const std::size_t q1 = r.n_episodes / 4;
  std::size_t worse = 0;
  for (std::size_t e = q1; e < r.n_episodes; ++e)
    if (!(hca[e] > pg[e])) ++worse;
  auto first_reach = [&](const std::vector<double>& c) {
    for (std::size_t e = 0; e < c.size(); ++e)
      if (c[e] >= optimal - kShortcutOptimalGap) return static_cast<long>(e);
    return -1L;
  };
  const long t_hca = first_reach(hca), t_pg = first_reach(pg);
  const bool ok = worse == 0 && t_hca >= 0 && (t_pg < 0 || t_pg > t_hca);
  return {ok, fmt("HCA not above PG at %zu of %zu episodes past Q1; first within %.2f of %.2f: HCA %ld, PG %ld",
                  worse, r.n_episodes - q1, kShortcutOptimalGap, optimal, t_hca, t_pg)};
}

// 4 ------------------------------------------------------------------------
Outcome advantage_probe() {
  const ExperimentConfig cfg = config("probe.conf");
  const auto rows = run_advantage_probe(cfg);
  std::string detail;
  bool ok = true;
  std::size_t points = 0;
  for (double p : cfg.sweep_values) {
    if (p < kProbeMinLongProb) continue;
    ++points;
    std::vector<double> oracle, hca, pg;
    for (const auto& row : rows) {
      if (row.long_prob != p) continue;
      if (row.method == ProbeMethod::Oracle) oracle.push_back(row.advantage);
      if (row.method == ProbeMethod::StateHCA) hca.push_back(row.advantage);
      if (row.method == ProbeMethod::BaselinePG) pg.push_back(row.advantage);
    }
    std::size_t larger = 0, closer = 0;
    for (std::size_t i = 0; i < hca.size(); ++i) {
      if (std::abs(hca[i]) >= std::abs(pg[i])) ++larger;
      if (std::abs(hca[i] - oracle[i]) < std::abs(pg[i] - oracle[i])) ++closer;
    }
    const std::size_t n = hca.size();
    ok = ok && larger >= kProbeMagnitudeFraction * n && 2 * closer > n;
    detail += fmt("p=%.2f: |HCA|>=|PG| %zu/%zu, closer %zu/%zu; ", p, larger, n, closer, n);
  }
  ok = ok && points > 0;
  if (detail.size() >= 2) detail.resize(detail.size() - 2);
  return {ok, detail};
}

// 5 ------------------------------------------------------------------------
Outcome delayed_bootstrap() {
  const ExperimentConfig cfg = config("delayed_bootstrap.conf");
  const RunResult r = run_experiment(cfg);
  auto final_mean = [&](Algorithm m) {
    double s = 0.0;
    for (const auto& seed : curve_of(r, m).returns) s += final_performance(seed);
    return s / r.n_seeds;
  };
  const double hca = final_mean(Algorithm::StateHCA), pg = final_mean(Algorithm::BaselinePG);
  return {pg <= kBootstrapBaselineMax && hca >= kBootstrapHcaMin,
          fmt("final mean return: state_hca %.3f (need >= %.2f), baseline_pg %.3f (need <= %.2f)", hca,
              kBootstrapHcaMin, pg, kBootstrapBaselineMax)};
}

// 6 ------------------------------------------------------------------------
Outcome delayed_noise() {
  const ExperimentConfig cfg = config("delayed_noise.conf");
  const auto rows = run_sweep(cfg);
  auto row = [&](double sigma, Algorithm m) {
    for (const auto& r : rows)
      if (r.axis_value == sigma && r.method == m) return r;
    throw ConfigError("sweep row missing");
  };
  const double top = cfg.sweep_values.back(), bottom = cfg.sweep_values.front();
  const auto h = row(top, Algorithm::StateHCA), mc = row(top, Algorithm::MonteCarloPG);
  const double pooled = std::sqrt(0.5 * (h.final_std * h.final_std + mc.final_std * mc.final_std));
  const bool beats = h.final_mean - mc.final_mean >= pooled;
  std::string detail = fmt("sigma=%g: state_hca %.3f, mc_pg %.3f, gap %.3f vs pooled std %.3f; drops:", top,
                           h.final_mean, mc.final_mean, h.final_mean - mc.final_mean, pooled);
  double hca_drop = 0.0;
  bool smallest = true;
  for (Algorithm m : cfg.methods) {
    const double drop = row(bottom, m).final_mean - row(top, m).final_mean;
    detail += fmt(" %s %.3f", std::string(to_string(m)).c_str(), drop);
    if (m == Algorithm::StateHCA) hca_drop = drop;
  }
  for (Algorithm m : cfg.methods)
    if (m != Algorithm::StateHCA && row(bottom, m).final_mean - row(top, m).final_mean < hca_drop) smallest = false;
  return {beats && smallest, detail};
}

// 7 ------------------------------------------------------------------------
// HCA variants keep the configured lr; the baseline gets its best lr from
// the calibration grid.
struct BanditAuc {
  double state_hca = 0.0, return_hca = 0.0, baseline = 0.0, baseline_lr = 0.0;
};

BanditAuc bandit_auc(const ExperimentConfig& cfg) {
  BanditAuc out;
  const RunResult r = run_experiment(cfg);
  out.state_hca = area_under_curve(curve_of(r, Algorithm::StateHCA).mean);
  out.return_hca = area_under_curve(curve_of(r, Algorithm::ReturnHCA).mean);
  ExperimentConfig base = cfg;
  base.methods = {Algorithm::BaselinePG};
  for (const auto& row : calibrate(base))
    if (row.best) {
      out.baseline = row.auc;
      out.baseline_lr = row.lr;
    }
  return out;
}

Outcome ambiguous_bandit() {
  const BanditAuc obs = bandit_auc(config("bandit.conf"));
  const BanditAuc hid = bandit_auc(config("bandit_hidden.conf"));
  const bool ok = obs.state_hca > obs.baseline && obs.return_hca > obs.baseline && hid.return_hca > hid.baseline &&
                  !(hid.state_hca > hid.baseline);
  return {ok, fmt("AUC observable: state %.3f, return %.3f, PG %.3f (lr %.1f); hidden: state %.3f, return %.3f, "
                  "PG %.3f (lr %.1f)",
                  obs.state_hca, obs.return_hca, obs.baseline, obs.baseline_lr, hid.state_hca, hid.return_hca,
                  hid.baseline, hid.baseline_lr)};
}

// 8 ------------------------------------------------------------------------
Outcome noise_cancellation() {
  const std::vector<double> sigmas{0.0, 1.0, 2.0};
  const ExperimentConfig cfg = config("delayed_noise.conf");
  std::vector<std::pair<double, double>> hca_var, mc_var;
  for (double sigma : sigmas) {
    DelayedEffectConfig dc = cfg.delayed_effect;
    dc.noise_std = sigma;
    const TabularMDP mdp = build_delayed_effect(dc);
    SoftmaxPolicy pi(mdp.n_observations, mdp.n_actions);
    const double row[] = {std::log(kNoiseGoodProb), std::log(1.0 - kNoiseGoodProb)};
    pi.set_logits(0, row);
    const OracleSolution sol = solve_values(mdp, pi);

    AgentConfig ac;
    StateHindsightTable hs(mdp.n_observations, mdp.n_actions, kNoiseBeta);
    load_state_hindsight(hs, observation_hindsight(mdp, pi, truncated_geometric_weights(kNoiseBeta, 32)), pi);
    RewardModel rhat(mdp.n_observations, mdp.n_actions);
    for (StateId x = 0; x < mdp.n_states; ++x)
      for (ActionId a = 0; a < mdp.n_actions; ++a) rhat(mdp.observation_of[x], a) = mdp.mean_reward(x, a);
    ValueTable values(mdp.n_observations);

    std::vector<double> hca, mc;
    RunStreams rng(derive_seed(11, 0));
    for (std::size_t i = 0; i < kNoiseSamples; ++i) {
      const Trajectory t = sample_trajectory(mdp, pi, rng);
      const auto q = state_hca_action_values(t, 0, pi, hs, values, rhat, ac);
      const double vx = pi.prob(0, 0) * q[0] + pi.prob(0, 1) * q[1];
      hca.push_back(q[DelayedEffectConfig::kGood] - vx);
      mc.push_back(t.undiscounted_return() - sol.V[mdp.initial_state]);
    }
    hca_var.push_back(variance_with_se(hca));
    mc_var.push_back(variance_with_se(mc));
  }
  bool ok = true;
  std::string detail = "HCA var";
  for (std::size_t i = 0; i < sigmas.size(); ++i) {
    const double ratio = hca_var[i].first / hca_var[0].first;
    ok = ok && ratio <= kNoiseVarianceFactor && ratio >= 1.0 / kNoiseVarianceFactor;
    detail += fmt(" %.4f", hca_var[i].first);
  }
  detail += "; MC var growth vs n*sigma^2:";
  const double n = static_cast<double>(cfg.delayed_effect.n);
  for (std::size_t i = 1; i < sigmas.size(); ++i) {
    const double growth = mc_var[i].first - mc_var[0].first;
    const double slack = kNoiseSe * std::hypot(mc_var[i].second, mc_var[0].second);
    ok = ok && growth >= n * sigmas[i] * sigmas[i] - slack;
    detail += fmt(" %.3f/%.1f", growth, n * sigmas[i] * sigmas[i]);
  }
  return {ok, detail};
}

// 9 ------------------------------------------------------------------------
// Coefficient (h(bad|x0,y) - pi(bad|x0)) V(y) at the bootstrap observation y,
// logged after each early update. Negative means it discourages the bad action.
Outcome bootstrap_dynamics() {
  const ExperimentConfig cfg = config("delayed_bootstrap.conf");
  const TabularMDP mdp = cfg.build_environment();
  const AgentConfig ac = cfg.agent_for(Algorithm::StateHCA);
  const std::size_t early = std::max<std::size_t>(1, static_cast<std::size_t>(kDynamicsEarly * cfg.n_episodes));
  const ActionId bad = DelayedEffectConfig::kBad;
  std::size_t opposing = 0, total = 0;
  for (std::size_t s = 0; s < cfg.n_seeds; ++s) {
    Agent agent(mdp, ac);
    RunStreams rng(derive_seed(cfg.master_seed, s));
    for (std::size_t e = 0; e < early; ++e) {
      const Trajectory t = sample_trajectory(mdp, agent.policy, rng);
      agent.update(t);
      const std::size_t end = ac.window_end(0, t.size());
      if (end >= t.size() && t.terminated) continue;  // no bootstrap in this episode
      const ObsId x0 = t.obs_at(0), y = t.obs_at(end);
      const double c = (agent.state_hindsight.probs(x0, y)[bad] - agent.policy.prob(x0, bad)) * agent.values[y];
      ++total;
      if (c < 0.0) ++opposing;
    }
  }
  const double frac = total ? static_cast<double>(opposing) / total : 0.0;
  return {frac >= kDynamicsFraction,
          fmt("coefficient opposes the bad action in %zu of %zu early episodes (%.1f%%, need %.0f%%)", opposing, total,
              100.0 * frac, 100.0 * kDynamicsFraction)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, Outcome (*)()>> criteria{
      {"identity suite", identity_suite},
      {"gradient estimators unbiased", unbiasedness},
      {"shortcut learning curves", shortcut_curves},
      {"shortcut advantage probe", advantage_probe},
      {"delayed effect with bootstrapping", delayed_bootstrap},
      {"delayed effect reward noise", delayed_noise},
      {"ambiguous bandit", ambiguous_bandit},
      {"noise cancellation", noise_cancellation},
      {"bootstrapping dynamics", bootstrap_dynamics},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    std::printf("criterion %zu %-36s %s  %s\n", i + 1, criteria[i].first, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed ? 1 : 0;
}
