#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "trafficbp/calibrate.hpp"
#include "trafficbp/errors.hpp"
#include "trafficbp/io.hpp"
#include "trafficbp/netgraph.hpp"
#include "trafficbp/oracle.hpp"
#include "trafficbp/pipeline.hpp"
#include "trafficbp/propagate.hpp"
#include "trafficbp/simulate.hpp"

namespace trafficbp::cli {

namespace {

class Session {
 public:
  Session(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}

  std::ostream& log() { return err_ << "trafficbp: "; }

  template <typename Reader>
  auto read(const std::string& path, Reader&& reader) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(path + ": cannot open for reading");
    return reader(in, path);
  }

  void write(const std::string& path, const std::function<void(std::ostream&)>& writer) {
    if (path == "-") {
      writer(out_);
      out_.flush();
      return;
    }
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) throw DataError(path + ": cannot open for writing");
    writer(file);
    file.flush();
    if (!file) throw DataError(path + ": write failed");
  }

 private:
  std::ostream& out_;
  std::ostream& err_;
};

struct BpFlags {
  double damping = BpParams{}.damping;
  double tolerance = BpParams{}.tolerance;
  std::size_t max_iterations = BpParams{}.max_iterations;
  std::string schedule = "flooding";
  std::string init = "zero";
  double amplitude = 0.01;
  std::size_t workers = 1;

  void attach(CLI::App& app, std::string default_init) {
    init = std::move(default_init);
    app.add_option("--damping", damping, "Message damping in [0, 1)")->capture_default_str();
    app.add_option("--tol", tolerance, "Convergence tolerance on cavity fields")->capture_default_str();
    app.add_option("--max-iters", max_iterations, "Iteration cap")->capture_default_str();
    app.add_option("--schedule", schedule, "flooding | sequential")
        ->check(CLI::IsMember({"flooding", "sequential"}))
        ->capture_default_str();
    app.add_option("--init", init, "Message initialisation: zero | random")
        ->check(CLI::IsMember({"zero", "random"}))
        ->capture_default_str();
    app.add_option("--init-amplitude", amplitude, "Amplitude of random initialisation")
        ->capture_default_str();
    app.add_option("--workers", workers, "Threads for the flooding schedule")->capture_default_str();
  }

  BpParams params(std::uint64_t seed) const {
    BpParams p;
    p.damping = damping;
    p.tolerance = tolerance;
    p.max_iterations = max_iterations;
    p.schedule = schedule == "sequential" ? Schedule::sequential : Schedule::flooding;
    p.init.kind = init == "random" ? MessageInit::Kind::random : MessageInit::Kind::zero;
    p.init.seed = seed;
    p.init.amplitude = amplitude;
    p.workers = workers;
    validate(p);
    return p;
  }
};

void log_report(Session& session, const BpReport& report) {
  session.log() << "bp " << (report.converged ? "converged" : "did not converge") << " after "
                << report.iterations << " iterations, residual " << report.residual << ", "
                << report.wall_time.count() << " s\n";
}

/// Reorders history columns to graph segment order; DataError on mismatch.
HistoryMatrix align_columns(const HistoryMatrix& history, const SpaceTimeIndex& index,
                            const std::string& source) {
  if (history.cols() != index.segment_count()) {
    throw DataError(source + ": history has " + std::to_string(history.cols()) +
                    " segment columns, model has " + std::to_string(index.segment_count()));
  }
  std::vector<std::size_t> from(index.segment_count());
  std::vector<bool> seen(index.segment_count(), false);
  for (std::size_t c = 0; c < history.cols(); ++c) {
    const auto s = index.segment_index(history.columns()[c]);
    if (!s || seen[*s]) {
      throw DataError(source + ": history column '" + history.columns()[c] +
                      "' does not match the model segments");
    }
    seen[*s] = true;
    from[*s] = c;
  }
  HistoryMatrix out(index.graph().segments, history.rows());
  for (std::size_t r = 0; r < history.rows(); ++r) {
    for (std::size_t s = 0; s < index.segment_count(); ++s) {
      if (const auto state = history.state(r, from[s])) out.set(r, s, *state);
    }
  }
  return out;
}

struct GraphFlags {
  std::string kind;
  std::size_t n = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t degree = 3;

  void attach(CLI::App& app, bool required) {
    auto* k = app.add_option("--kind", kind, "ring | grid | random-regular")
                  ->check(CLI::IsMember({"ring", "grid", "random-regular"}));
    if (required) k->required();
    app.add_option("--n", n, "Segment count (ring, random-regular)");
    app.add_option("--rows", rows, "Grid rows");
    app.add_option("--cols", cols, "Grid columns");
    app.add_option("--degree", degree, "Degree (random-regular)")->capture_default_str();
  }

  GraphSpec spec(std::uint64_t seed) const {
    return GraphSpec{*parse_graph_kind(kind), n, rows, cols, degree, seed};
  }
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Session session(out, err);
  CLI::App app{"Traffic reconstruction and prediction with loopy belief propagation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "trafficbp 0.1.0");

  std::uint64_t seed = kDefaultSeed;
  std::string output;
  auto add_common = [&](CLI::App& sub, bool output_required = true) {
    sub.add_option("--seed", seed, "Seed for every random draw")->capture_default_str();
    auto* o = sub.add_option("-o,--output", output, "Output path, '-' for stdout");
    if (output_required) o->required();
  };

  std::function<void()> action;

  // gen-graph
  GraphFlags graph_flags;
  auto* gen = app.add_subcommand("gen-graph", "Generate a test road network (graph JSON)");
  graph_flags.attach(*gen, true);
  add_common(*gen);
  gen->callback([&] {
    action = [&] {
      const RoadGraph graph = gen_graph(graph_flags.spec(seed));
      session.write(output, [&](std::ostream& os) { write_graph(os, graph); });
      session.log() << "wrote " << graph.segments.size() << " segments, " << graph.adjacency.size()
                    << " adjacency pairs to " << output << '\n';
    };
  });

  // simulate
  std::string graph_path;
  std::size_t steps = 0;
  DynamicsParams dynamics;
  auto* sim = app.add_subcommand("simulate", "Simulate ground-truth congestion (history CSV)");
  sim->add_option("--graph", graph_path, "Graph JSON")->required();
  sim->add_option("--steps", steps, "Rows to record after burn-in")->required();
  sim->add_option("--alpha", dynamics.alpha, "Base congestion log-odds")->capture_default_str();
  sim->add_option("--beta", dynamics.beta, "Self-persistence weight")->capture_default_str();
  sim->add_option("--gamma", dynamics.gamma, "Neighbour-pressure weight")->capture_default_str();
  sim->add_option("--burn-in", dynamics.burn_in, "Discarded initial steps")->capture_default_str();
  add_common(*sim);
  sim->callback([&] {
    action = [&] {
      const RoadGraph graph = session.read(graph_path, read_graph);
      const HistoryMatrix history = simulate(graph, dynamics, steps, seed);
      session.write(output, [&](std::ostream& os) { write_history(os, history); });
      session.log() << "wrote " << history.rows() << " rows to " << output << '\n';
    };
  });

  // probe-sample
  std::string history_path;
  std::size_t first_row = 0;
  std::size_t window_layers = 0;
  ProbeParams probes;
  auto* probe = app.add_subcommand("probe-sample", "Sample probe observations from a history window");
  probe->add_option("--history", history_path, "History CSV")->required();
  probe->add_option("--first", first_row, "First history row of the window")->capture_default_str();
  probe->add_option("--layers", window_layers, "Layers to sample (the observed part of a window)")
      ->required();
  probe->add_option("--coverage", probes.coverage, "Per-cell observation probability")
      ->capture_default_str();
  probe->add_option("--flip", probes.flip, "Probability a reported state is flipped")
      ->capture_default_str();
  add_common(*probe);
  probe->callback([&] {
    action = [&] {
      const HistoryMatrix history = session.read(history_path, read_history);
      probes.seed = seed;
      const ObservationSet obs = sample_probes(history, probes, first_row, window_layers);
      const SpaceTimeIndex index(RoadGraph{history.columns(), {}}, window_layers);
      session.write(output, [&](std::ostream& os) { write_observations(os, obs, index); });
      session.log() << "wrote " << obs.size() << " observations to " << output << '\n';
    };
  });

  // calibrate
  std::size_t layers = 6;
  double pseudocount = kDefaultPseudocount;
  std::optional<std::size_t> calibration_rows;
  auto* cal = app.add_subcommand("calibrate", "Estimate a space-time model from history");
  cal->add_option("--graph", graph_path, "Graph JSON")->required();
  cal->add_option("--history", history_path, "History CSV")->required();
  cal->add_option("--layers", layers, "Space-time layers T")->capture_default_str();
  cal->add_option("--pseudocount", pseudocount, "Additive smoothing per table cell")
      ->capture_default_str();
  cal->add_option("--rows", calibration_rows, "Use only the first N history rows");
  add_common(*cal);
  cal->callback([&] {
    action = [&] {
      const RoadGraph graph = session.read(graph_path, read_graph);
      HistoryMatrix history = session.read(history_path, read_history);
      if (calibration_rows) history = history.slice(0, *calibration_rows);
      const SpaceTimeIndex index = build_space_time(graph, layers);
      const SpaceTimeModel model = calibrate(history, index, pseudocount);
      session.write(output, [&](std::ostream& os) { write_model(os, model); });
      session.log() << "calibrated " << index.variable_count() << " variables, "
                    << index.edges().size() << " edges from " << history.rows() << " rows\n";
    };
  });

  // infer
  std::string model_path;
  std::string obs_path;
  std::string report_path;
  BpFlags infer_bp;
  auto* inf = app.add_subcommand("infer", "Reconstruct and predict congestion probabilities");
  inf->add_option("--model", model_path, "Model JSON")->required();
  inf->add_option("--obs", obs_path, "Observations CSV (omit for none)");
  inf->add_option("--report", report_path, "Write the BP report JSON here");
  infer_bp.attach(*inf, "zero");
  add_common(*inf);
  inf->callback([&] {
    action = [&] {
      const SpaceTimeModel st = session.read(model_path, read_model);
      const PairwiseModel model = assemble_model(st);
      ObservationSet obs;
      if (!obs_path.empty()) {
        obs = session.read(obs_path, [&](std::istream& in, const std::string& src) {
          return read_observations(in, src, st.index);
        });
      }
      const Reconstruction rec = reconstruct(model, obs, infer_bp.params(seed));
      log_report(session, rec.report);
      session.write(output, [&](std::ostream& os) {
        write_beliefs(os, rec.beliefs.p_congested, st.index);
      });
      if (!report_path.empty()) {
        session.write(report_path, [&](std::ostream& os) { write_bp_report(os, rec.report); });
      }
    };
  });

  // eval
  std::string beliefs_path;
  std::size_t observed_layers = 0;
  auto* ev = app.add_subcommand("eval", "Score beliefs against a ground-truth window");
  ev->add_option("--model", model_path, "Model JSON (defines segments and layers)")->required();
  ev->add_option("--beliefs", beliefs_path, "Beliefs CSV")->required();
  ev->add_option("--history", history_path, "Ground-truth history CSV")->required();
  ev->add_option("--first", first_row, "History row of layer 0")->capture_default_str();
  ev->add_option("--obs", obs_path, "Observations CSV used for the beliefs");
  ev->add_option("--t-obs", observed_layers, "Reconstruction layers (default: all)");
  ev->add_option("--report", report_path, "BP report JSON written by infer");
  add_common(*ev);
  ev->callback([&] {
    action = [&] {
      const SpaceTimeModel st = session.read(model_path, read_model);
      const auto& index = st.index;
      const auto p = session.read(beliefs_path, [&](std::istream& in, const std::string& src) {
        return read_beliefs(in, src, index);
      });
      const HistoryMatrix history =
          align_columns(session.read(history_path, read_history), index, history_path);
      ObservationSet obs;
      if (!obs_path.empty()) {
        obs = session.read(obs_path, [&](std::istream& in, const std::string& src) {
          return read_observations(in, src, index);
        });
      }
      std::optional<BpReport> report;
      if (!report_path.empty()) report = session.read(report_path, read_bp_report);
      const WindowSpec window{index.layers(), observed_layers == 0 ? index.layers() : observed_layers};
      const Metrics metrics = evaluate(p, history.slice(first_row, index.layers()), obs, window);
      session.write(output, [&](std::ostream& os) { write_metrics(os, metrics, report); });
      session.log() << "overall brier " << metrics.all.brier << ", hidden brier "
                    << metrics.hidden.brier << '\n';
    };
  });

  // phase-scan
  GraphFlags scan_graph;
  double j_min = 0.30;
  double j_max = 0.80;
  double j_step = 0.05;
  BpFlags scan_bp;
  auto* scan = app.add_subcommand("phase-scan", "Zero-field magnetization versus coupling");
  scan_graph.attach(*scan, false);
  scan_graph.kind = "random-regular";
  scan_graph.n = 200;
  scan->add_option("--j-min", j_min, "First coupling")->capture_default_str();
  scan->add_option("--j-max", j_max, "Last coupling (inclusive)")->capture_default_str();
  scan->add_option("--j-step", j_step, "Coupling step")->capture_default_str();
  scan_bp.attach(*scan, "random");
  add_common(*scan);
  scan->callback([&] {
    action = [&] {
      if (!(j_step > 0.0) || j_max < j_min) throw ParameterError("need j-step > 0 and j-max >= j-min");
      std::vector<double> grid;
      const auto count = static_cast<std::size_t>(std::floor((j_max - j_min) / j_step + 1e-9)) + 1;
      // snapped to 1e-9 to drop accumulated step error
      for (std::size_t k = 0; k < count; ++k) {
        grid.push_back(std::round((j_min + static_cast<double>(k) * j_step) * 1e9) / 1e9);
      }
      const auto points = phase_scan(scan_graph.spec(seed), grid, scan_bp.params(seed), seed);
      session.write(output, [&](std::ostream& os) { write_phase_scan(os, points); });
      session.log() << "scanned " << points.size() << " couplings\n";
    };
  });

  // verify
  double verify_tolerance = 1e-6;
  BpFlags verify_bp;
  auto* ver = app.add_subcommand("verify", "Compare BP with exact enumeration on a small model");
  ver->add_option("--model", model_path, "Model JSON")->required();
  ver->add_option("--obs", obs_path, "Observations CSV (omit for none)");
  ver->add_option("--tolerance", verify_tolerance, "Maximum accepted marginal error")
      ->capture_default_str();
  verify_bp.attach(*ver, "zero");
  verify_bp.tolerance = 1e-12;
  verify_bp.max_iterations = 10000;
  output = "-";
  add_common(*ver, false);
  int verify_status = kExitOk;
  ver->callback([&] {
    action = [&] {
      const SpaceTimeModel st = session.read(model_path, read_model);
      const PairwiseModel model = assemble_model(st);
      ObservationSet obs;
      if (!obs_path.empty()) {
        obs = session.read(obs_path, [&](std::istream& in, const std::string& src) {
          return read_observations(in, src, st.index);
        });
      }
      const Reconstruction rec = reconstruct(model, obs, verify_bp.params(seed));
      log_report(session, rec.report);

      // Conditional marginals from the full joint, independent of field folding.
      const auto joint = state_probabilities(model);
      std::vector<double> exact(model.variable_count(), 0.0);
      double evidence = 0.0;
      for (std::uint64_t c = 0; c < joint.size(); ++c) {
        bool consistent = true;
        for (const auto& [v, state] : obs.entries()) {
          if (((c >> v) & 1U) != static_cast<std::uint64_t>(to_int(state))) {
            consistent = false;
            break;
          }
        }
        if (!consistent) continue;
        evidence += joint[c];
        for (std::size_t v = 0; v < exact.size(); ++v) {
          if (((c >> v) & 1U) != 0) exact[v] += joint[c];
        }
      }
      double max_error = 0.0;
      for (std::size_t v = 0; v < exact.size(); ++v) {
        max_error = std::max(max_error, std::abs(exact[v] / evidence - rec.beliefs.p_congested[v]));
      }
      const bool pass = max_error <= verify_tolerance;
      session.write(output, [&](std::ostream& os) {
        os << "variables " << model.variable_count() << '\n'
           << "observed " << obs.size() << '\n'
           << "bp_converged " << (rec.report.converged ? "true" : "false") << '\n'
           << "bp_iterations " << rec.report.iterations << '\n'
           << "max_marginal_error " << format_double(max_error) << '\n'
           << "tolerance " << format_double(verify_tolerance) << '\n'
           << "result " << (pass ? "pass" : "fail") << '\n';
      });
      if (!pass) {
        session.log() << "max marginal error " << max_error << " exceeds tolerance "
                      << verify_tolerance << '\n';
        verify_status = kExitRuntime;
      }
    };
  });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    action();
    return verify_status;
  } catch (const ParameterError& e) {
    session.log() << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    session.log() << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace trafficbp::cli
