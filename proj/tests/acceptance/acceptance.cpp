// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Every tolerance is a constant below.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "support/test_models.hpp"
#include "trafficbp/calibrate.hpp"
#include "trafficbp/oracle.hpp"
#include "trafficbp/pipeline.hpp"
#include "trafficbp/propagate.hpp"
#include "trafficbp/simulate.hpp"

namespace tb = trafficbp;
namespace fs = std::filesystem;

namespace {

constexpr double kTreeMarginalTol = 1e-9;
constexpr double kTreeFreeEnergyTol = 1e-8;
constexpr double kConditioningTol = 1e-12;
constexpr double kRoundTripTol = 1e-8;
constexpr double kSampleCouplingTol = 0.05;
constexpr double kParamagneticMax = 0.05;
constexpr double kParamagneticJ = 0.49;
constexpr double kOrderedMin = 0.2;
constexpr double kOrderedJ = 0.66;
constexpr double kPhaseScanSeconds = 30.0;
constexpr double kPerformanceSeconds = 1.0;
constexpr double kPerformanceTol = 1e-6;

struct Outcome {
  bool pass;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(const char* format, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

tb::BpParams exact_bp() {
  tb::BpParams p;
  p.tolerance = 1e-12;
  p.max_iterations = 10000;
  return p;
}

Outcome tree_exactness() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(1001);
  double marginal_err = 0.0;
  double energy_err = 0.0;
  bool converged = true;
  for (int trial = 0; trial < 200; ++trial) {
    const auto m = tb::testing::random_tree(rng, 1 + rng() % 15);
    const auto exact = tb::enumerate(m);
    const auto bp = tb::run_bp(m, exact_bp());
    converged &= bp.report.converged;
    for (std::size_t v = 0; v < m.variable_count(); ++v) {
      marginal_err = std::max(marginal_err, std::abs(bp.beliefs.p_congested[v] - exact.p_congested[v]));
    }
    energy_err = std::max(energy_err, std::abs(tb::bethe_free_energy(m, bp.messages) + exact.log_partition));
  }
  const double secs = seconds_since(start);
  return {converged && marginal_err <= kTreeMarginalTol && energy_err <= kTreeFreeEnergyTol,
          fmt("200 trees, max marginal error %.3g (<= %.0e), max |F + ln Z| %.3g (<= %.0e), %.2f s",
              marginal_err, kTreeMarginalTol, energy_err, kTreeFreeEnergyTol, secs)};
}

Outcome conditioning_exactness() {
  std::mt19937_64 rng(1002);
  double err = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t v = 1 + rng() % 12;
    const auto m = tb::testing::random_graph_model(rng, v, 0.4);
    tb::ObservationSet obs;
    for (std::size_t k = 0; k < v; ++k) {
      if (rng() % 3 == 0) obs.add(k, rng() % 2 == 0 ? tb::TrafficState::fluid : tb::TrafficState::congested);
    }
    const auto conditioned = tb::condition(m, obs);
    const auto full = tb::state_probabilities(m);
    std::vector<double> expected(std::size_t{1} << conditioned.kept.size(), 0.0);
    double evidence = 0.0;
    for (std::uint64_t c = 0; c < full.size(); ++c) {
      bool consistent = true;
      for (const auto& [var, s] : obs.entries()) consistent &= ((c >> var) & 1U) == std::uint64_t(tb::to_int(s));
      if (!consistent) continue;
      evidence += full[c];
      std::uint64_t r = 0;
      for (std::size_t k = 0; k < conditioned.kept.size(); ++k) r |= ((c >> conditioned.kept[k]) & 1U) << k;
      expected[r] += full[c];
    }
    const auto reduced = tb::state_probabilities(conditioned.reduced);
    for (std::size_t r = 0; r < reduced.size(); ++r) err = std::max(err, std::abs(reduced[r] - expected[r] / evidence));
  }
  return {err <= kConditioningTol,
          fmt("100 models, max |p_reduced - p_conditional| %.3g (<= %.0e)", err, kConditioningTol)};
}

Outcome round_trip() {
  std::mt19937_64 rng(1003);
  double err = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto m = tb::testing::random_tree(rng, 1 + rng() % 15);
    const auto back = tb::bethe_inverse(tb::exact_moments(m));
    for (std::size_t e = 0; e < m.edges.size(); ++e) err = std::max(err, std::abs(back.edges[e].J - m.edges[e].J));
    for (std::size_t i = 0; i < m.variable_count(); ++i) err = std::max(err, std::abs(back.fields[i] - m.fields[i]));
  }
  return {err <= kRoundTripTol, fmt("100 trees, max parameter error %.3g (<= %.0e)", err, kRoundTripTol)};
}

Outcome calibration_from_samples() {
  std::mt19937_64 rng(1004);
  const auto truth = tb::testing::random_tree(rng, 10);
  tb::RoadGraph g;
  for (std::size_t k = 0; k < 10; ++k) g.segments.push_back("v" + std::to_string(k));
  for (const auto& e : truth.edges) g.adjacency.emplace_back(g.segments[e.i], g.segments[e.j]);
  const auto samples = tb::sample_exact(truth, 100000, 1004, g.segments);
  const auto model = tb::calibrate(samples, tb::build_space_time(g, 1));
  double err = 0.0;
  for (std::size_t e = 0; e < truth.edges.size(); ++e) {
    err = std::max(err, std::abs(model.spatial_coupling[e] - truth.edges[e].J));
  }
  return {err <= kSampleCouplingTol,
          fmt("V=10 tree, 1e5 samples, max |J - J_true| %.4f (<= %.2f)", err, kSampleCouplingTol)};
}

Outcome phase_transition() {
  const auto start = std::chrono::steady_clock::now();
  std::vector<double> grid;
  for (int k = 0; k <= 10; ++k) grid.push_back(0.30 + 0.05 * k);
  tb::BpParams params;
  params.init = {tb::MessageInit::Kind::random, 0, 0.01};
  const tb::GraphSpec spec{tb::GraphKind::random_regular, 200, 0, 0, 3, 1005};
  const auto points = tb::phase_scan(spec, grid, params, 1005);
  bool pass = true;
  double worst_low = 0.0;
  double worst_high = 1.0;
  for (const auto& p : points) {
    if (p.coupling <= kParamagneticJ) worst_low = std::max(worst_low, p.abs_magnetization);
    if (p.coupling >= kOrderedJ) worst_high = std::min(worst_high, p.abs_magnetization);
  }
  pass = worst_low < kParamagneticMax && worst_high > kOrderedMin;
  const double secs = seconds_since(start);
  return {pass && secs < kPhaseScanSeconds,
          fmt("max |m| for J <= %.2f: %.3g (< %.2f); min |m| for J >= %.2f: %.3g (> %.1f); %.2f s (< %.0f s)",
              kParamagneticJ, worst_low, kParamagneticMax, kOrderedJ, worst_high, kOrderedMin, secs,
              kPhaseScanSeconds)};
}

Outcome end_to_end() {
  const auto graph = tb::gen_graph({tb::GraphKind::random_regular, 50, 0, 0, 3, 1006});
  constexpr std::size_t kCalibrationRows = 5000;
  constexpr std::size_t kWindows = 20;
  const tb::WindowSpec window{6, 4};
  const auto history = tb::simulate(graph, {}, kCalibrationRows + kWindows * 10, 1006);
  const auto index = tb::build_space_time(graph, window.layers);
  const auto calibration = history.slice(0, kCalibrationRows);
  const auto moments = tb::estimate_moments(calibration, index);
  const auto model = tb::assemble_model(tb::calibrate_from_moments(moments, index));
  const auto baseline = tb::baseline_marginal(moments, index);

  double bp_brier = 0.0;
  double base_brier = 0.0;
  for (std::size_t w = 0; w < kWindows; ++w) {
    const std::size_t first = kCalibrationRows + w * 10;
    const auto obs = tb::sample_probes(history, {0.25, 0.0, 1006 + w}, first, window.observed_layers);
    const auto truth = history.slice(first, window.layers);
    const auto rec = tb::reconstruct(model, obs, {});
    bp_brier += tb::evaluate(rec.beliefs.p_congested, truth, obs, window).hidden.brier;
    base_brier += tb::evaluate(baseline.p_congested, truth, obs, window).hidden.brier;
  }
  bp_brier /= kWindows;
  base_brier /= kWindows;
  return {bp_brier < base_brier,
          fmt("20 windows, mean hidden Brier: BP %.5f, climatology %.5f", bp_brier, base_brier)};
}

Outcome performance() {
  const auto graph = tb::gen_graph({tb::GraphKind::random_regular, 1000, 0, 0, 3, 1007});
  const auto index = tb::build_space_time(graph, 6);
  std::mt19937_64 rng(1007);
  std::uniform_real_distribution<double> field(-0.5, 0.5);
  std::vector<double> h(index.variable_count());
  for (double& x : h) x = field(rng);
  const std::vector<double> spatial(index.pairs().size(), 0.2);
  const std::vector<double> temporal(index.segment_count(), 0.6);
  const auto model = tb::assemble_model(index, spatial, temporal, h);
  tb::BpParams params;
  params.tolerance = kPerformanceTol;
  const auto start = std::chrono::steady_clock::now();
  const auto result = tb::run_bp(model, params);
  const double secs = seconds_since(start);
  return {secs < kPerformanceSeconds,
          fmt("%zu variables, %zu edges: %s after %zu iterations, residual %.3g, %.3f s (< %.0f s)",
              model.variable_count(), model.edges.size(), result.report.converged ? "converged" : "stopped",
              result.report.iterations, result.report.residual, secs, kPerformanceSeconds)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "trafficbp_acceptance_determinism";
  fs::remove_all(root);
  const std::string cli = TRAFFICBP_CLI_PATH;
  const std::vector<std::string> files{"g.json", "h.csv", "m.json", "o.csv", "b.csv", "r.json", "e.json", "p.csv"};
  for (const char* run : {"a", "b"}) {
    const fs::path d = root / run;
    fs::create_directories(d);
    auto p = [&](const char* f) { return "'" + (d / f).string() + "'"; };
    const std::vector<std::string> steps{
        "gen-graph --kind random-regular --n 30 --degree 3 --seed 8 -o " + p("g.json"),
        "simulate --graph " + p("g.json") + " --steps 1200 --seed 8 -o " + p("h.csv"),
        "calibrate --graph " + p("g.json") + " --history " + p("h.csv") + " --rows 1000 -o " + p("m.json"),
        "probe-sample --history " + p("h.csv") + " --first 1100 --layers 4 --flip 0.05 --seed 8 -o " + p("o.csv"),
        "infer --model " + p("m.json") + " --obs " + p("o.csv") + " --init random --seed 8 --report " +
            p("r.json") + " -o " + p("b.csv"),
        "eval --model " + p("m.json") + " --beliefs " + p("b.csv") + " --history " + p("h.csv") +
            " --first 1100 --obs " + p("o.csv") + " --t-obs 4 --report " + p("r.json") + " -o " + p("e.json"),
        "phase-scan --n 60 --j-step 0.1 --seed 8 -o " + p("p.csv"),
    };
    for (const auto& s : steps) {
      const std::string command = "'" + cli + "' " + s + " 2>/dev/null";
      if (std::system(command.c_str()) != 0) return {false, "command failed: " + command};
    }
  }
  std::size_t identical = 0;
  for (const auto& f : files) {
    const auto a = slurp(root / "a" / f);
    if (!a.empty() && a == slurp(root / "b" / f)) ++identical;
  }
  fs::remove_all(root);
  return {identical == files.size(),
          fmt("%zu of %zu pipeline outputs byte-identical across two runs", identical, files.size())};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"tree exactness", tree_exactness},
      {"conditioning exactness", conditioning_exactness},
      {"calibration round trip", round_trip},
      {"calibration from samples", calibration_from_samples},
      {"phase transition", phase_transition},
      {"end-to-end benefit", end_to_end},
      {"performance", performance},
      {"determinism", determinism},
  };
  int failures = 0;
  int number = 1;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::printf("%s %d %s: %s\n", o.pass ? "PASS" : "FAIL", number++, name, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
