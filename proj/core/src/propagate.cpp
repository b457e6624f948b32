#include "trafficbp/propagate.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>

#include "trafficbp/errors.hpp"
#include "trafficbp/rng.hpp"

namespace trafficbp {

namespace {

constexpr std::uint64_t kInitStream = 0x1417;
constexpr double kFastFieldLimit = 15.0;

// log cosh(x) + ln 2, stable for any finite x.
double log_cosh_shifted(double x) noexcept {
  const double a = std::abs(x);
  return a + std::log1p(std::exp(-2.0 * a));
}

double p_congested_from_field(double local_field) noexcept {
  return 1.0 / (1.0 + std::exp(2.0 * local_field));
}

double xlogx(double p) noexcept { return p > 0.0 ? p * std::log(p) : 0.0; }

void require_valid(const PairwiseModel& model) {
  const auto diagnostics = validate_model(model);
  if (has_errors(diagnostics)) throw ParameterError("invalid model:\n" + to_string(diagnostics));
}

void require_message_count(const PairwiseModel& model, const MessageSet& messages) {
  if (messages.cavity.size() != 2 * model.edges.size()) {
    throw ParameterError("message set has " + std::to_string(messages.cavity.size()) +
                         " cavity fields, model needs " + std::to_string(2 * model.edges.size()));
  }
}

double mix(double damping, double fresh, double old) noexcept {
  return (1.0 - damping) * fresh + damping * old;
}

double cavity_update_fast(double coupling, double exp_coupling, double cavity_local_field) noexcept;

// Undamped updates of all directed edges into `next`; returns max |next - current|.
// Cavity fields come from H_i - u_{j->i}, local fields computed once per sweep.
double flood(const MessageGraph& graph, const MessageSet& current, std::span<const double> exp_coupling,
             std::vector<double>& local, std::vector<double>& next, std::size_t workers) {
  const PairwiseModel& model = graph.model();
  const std::size_t count = graph.directed_edge_count();
  const std::size_t variables = model.variable_count();
  auto fields = [&](std::size_t begin, std::size_t end) {
    for (std::size_t v = begin; v < end; ++v) local[v] = graph.local_field(current, v);
  };
  auto work = [&](std::size_t begin, std::size_t end) {
    double residual = 0.0;
    for (std::size_t d = begin; d < end; ++d) {
      const std::size_t e = d / 2;
      const std::size_t sender = d % 2 == 0 ? model.edges[e].i : model.edges[e].j;
      const double cavity = local[sender] - current.cavity[reverse_edge(d)];
      next[d] = cavity_update_fast(model.edges[e].J, exp_coupling[e], cavity);
      residual = std::max(residual, std::abs(next[d] - current.cavity[d]));
    }
    return residual;
  };
  if (workers <= 1 || count < 2 * workers) {
    fields(0, variables);
    return work(0, count);
  }

  auto split = [workers](std::size_t n, std::size_t w) {
    const std::size_t chunk = (n + workers - 1) / workers;
    const std::size_t begin = std::min(n, w * chunk);
    return std::pair{begin, std::min(n, begin + chunk)};
  };
  {
    std::vector<std::jthread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      const auto [begin, end] = split(variables, w);
      threads.emplace_back([&, begin, end] { fields(begin, end); });
    }
  }
  std::vector<double> partial(workers, 0.0);
  {
    std::vector<std::jthread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      const auto [begin, end] = split(count, w);
      threads.emplace_back([&, w, begin, end] { partial[w] = work(begin, end); });
    }
  }
  return *std::ranges::max_element(partial);
}

double jacobi_residual(const MessageGraph& graph, const MessageSet& messages) {
  double residual = 0.0;
  for (std::size_t d = 0; d < graph.directed_edge_count(); ++d) {
    residual = std::max(residual, std::abs(update_message(graph, messages, d) - messages.cavity[d]));
  }
  return residual;
}

}  // namespace

void validate(const BpParams& params) {
  if (!(params.damping >= 0.0 && params.damping < 1.0)) {
    throw ParameterError("damping must lie in [0, 1), got " + std::to_string(params.damping));
  }
  if (!(params.tolerance > 0.0)) {
    throw ParameterError("tolerance must be > 0, got " + std::to_string(params.tolerance));
  }
  if (params.max_iterations < 1) throw ParameterError("max_iterations must be >= 1");
  if (params.workers < 1) throw ParameterError("workers must be >= 1");
  if (params.init.kind == MessageInit::Kind::random && !std::isfinite(params.init.amplitude)) {
    throw ParameterError("random init amplitude must be finite");
  }
}

MessageGraph::MessageGraph(const PairwiseModel& model) : model_(&model) {
  const std::size_t v = model.variable_count();
  offsets_.assign(v + 1, 0);
  for (const auto& e : model.edges) {
    ++offsets_[e.i + 1];
    ++offsets_[e.j + 1];
  }
  for (std::size_t i = 0; i < v; ++i) offsets_[i + 1] += offsets_[i];
  incoming_.resize(offsets_[v]);
  std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
  for (std::size_t d = 0; d < directed_edge_count(); ++d) {
    incoming_[fill[receiver(d)]++] = d;
  }
}

std::size_t MessageGraph::sender(std::size_t directed) const noexcept {
  const auto& e = model_->edges[directed / 2];
  return directed % 2 == 0 ? e.i : e.j;
}

std::size_t MessageGraph::receiver(std::size_t directed) const noexcept {
  const auto& e = model_->edges[directed / 2];
  return directed % 2 == 0 ? e.j : e.i;
}

std::span<const std::size_t> MessageGraph::incoming(std::size_t variable) const noexcept {
  return std::span(incoming_).subspan(offsets_[variable], offsets_[variable + 1] - offsets_[variable]);
}

double MessageGraph::local_field(const MessageSet& messages, std::size_t variable) const noexcept {
  double h = model_->fields[variable];
  for (const std::size_t in : incoming(variable)) h += messages.cavity[in];
  return h;
}

double MessageGraph::cavity_local_field(const MessageSet& messages,
                                        std::size_t directed) const noexcept {
  const std::size_t i = sender(directed);
  const std::size_t skip = reverse_edge(directed);
  double h = model_->fields[i];
  for (const std::size_t in : incoming(i)) {
    if (in != skip) h += messages.cavity[in];
  }
  return h;
}

double cavity_update(double coupling, double cavity_local_field) noexcept {
  const double u = 0.5 * (log_cosh_shifted(coupling + cavity_local_field) -
                          log_cosh_shifted(coupling - cavity_local_field));
  return std::clamp(u, -kMaxCavityField, kMaxCavityField);
}

namespace {
// cosh(J + H) / cosh(J - H) = (g E + 1) / (g + E) with g = e^{2J}, E = e^{2H}.
// Large arguments take the overflow-safe path; |u| <= min(|J|, |H|).
double cavity_update_fast(double coupling, double exp_coupling, double cavity_local_field) noexcept {
  if (std::abs(cavity_local_field) > kFastFieldLimit || std::abs(coupling) > kFastFieldLimit) {
    return cavity_update(coupling, cavity_local_field);
  }
  // Odd in H; evaluated on |H| so that u(J, -H) = -u(J, H) exactly.
  const double e = std::exp(2.0 * std::abs(cavity_local_field));
  const double u = 0.5 * std::log((exp_coupling * e + 1.0) / (exp_coupling + e));
  return cavity_local_field < 0.0 ? -u : u;
}
}  // namespace

double update_message(const MessageGraph& graph, const MessageSet& messages, std::size_t directed) {
  return cavity_update(graph.coupling(directed), graph.cavity_local_field(messages, directed));
}

MessageSet initial_messages(const PairwiseModel& model, const MessageInit& init) {
  MessageSet messages;
  messages.cavity.assign(2 * model.edges.size(), 0.0);
  if (init.kind == MessageInit::Kind::zero) return messages;
  // A random bias η ∈ [-a, a] on each sender, pushed through the edge; edges
  // with J = 0 therefore start at exactly zero.
  const CounterRng rng(init.seed, kInitStream);
  for (std::size_t d = 0; d < messages.cavity.size(); ++d) {
    const double eta = rng.uniform(d, -init.amplitude, init.amplitude);
    messages.cavity[d] = cavity_update(model.edges[d / 2].J, eta);
  }
  return messages;
}

BpResult run_bp(const PairwiseModel& model, const BpParams& params) {
  return run_bp(model, params, initial_messages(model, params.init));
}

BpResult run_bp(const PairwiseModel& model, const BpParams& params, MessageSet initial) {
  validate(params);
  require_valid(model);
  require_message_count(model, initial);

  const auto start = std::chrono::steady_clock::now();
  const MessageGraph graph(model);
  BpResult result;
  result.messages = std::move(initial);
  auto& u = result.messages.cavity;
  auto& report = result.report;
  std::vector<double> next(u.size(), 0.0);
  std::vector<double> local(model.variable_count(), 0.0);
  std::vector<double> exp_coupling(model.edges.size());
  for (std::size_t e = 0; e < model.edges.size(); ++e) exp_coupling[e] = std::exp(2.0 * model.edges[e].J);

  for (std::size_t iter = 1; iter <= params.max_iterations; ++iter) {
    report.iterations = iter;
    if (params.schedule == Schedule::flooding) {
      report.residual = flood(graph, result.messages, exp_coupling, local, next, params.workers);
      if (report.residual <= params.tolerance) {
        report.converged = true;
        break;
      }
      for (std::size_t d = 0; d < u.size(); ++d) u[d] = mix(params.damping, next[d], u[d]);
    } else {
      double sweep_change = 0.0;
      for (std::size_t d = 0; d < u.size(); ++d) {
        const double fresh = update_message(graph, result.messages, d);
        sweep_change = std::max(sweep_change, std::abs(fresh - u[d]));
        u[d] = mix(params.damping, fresh, u[d]);
      }
      report.residual = sweep_change;
      if (sweep_change <= params.tolerance) {
        // In-place sweeps can hide a residual; confirm on the final messages.
        report.residual = jacobi_residual(graph, result.messages);
        if (report.residual <= params.tolerance) {
          report.converged = true;
          break;
        }
      }
    }
  }
  if (!report.converged) {
    report.residual = jacobi_residual(graph, result.messages);
    report.converged = report.residual <= params.tolerance;
  }

  result.beliefs.p_congested = variable_beliefs(graph, result.messages);
  result.beliefs.pairs = pair_beliefs(model, result.messages);
  report.wall_time = std::chrono::steady_clock::now() - start;
  return result;
}

std::vector<double> variable_beliefs(const MessageGraph& graph, const MessageSet& messages) {
  std::vector<double> p(graph.model().variable_count());
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = p_congested_from_field(graph.local_field(messages, i));
  }
  return p;
}

std::vector<PairBelief> pair_beliefs(const PairwiseModel& model, const MessageSet& messages) {
  require_message_count(model, messages);
  const MessageGraph graph(model);
  std::vector<PairBelief> out;
  out.reserve(model.edges.size());
  for (std::size_t e = 0; e < model.edges.size(); ++e) {
    const double a = graph.cavity_local_field(messages, 2 * e);
    const double b = graph.cavity_local_field(messages, 2 * e + 1);
    const double coupling = model.edges[e].J;
    JointTable logw{};
    double top = -INFINITY;
    for (int xi = 0; xi < 2; ++xi) {
      for (int xj = 0; xj < 2; ++xj) {
        const int si = 1 - 2 * xi;
        const int sj = 1 - 2 * xj;
        logw[xi][xj] = coupling * si * sj + a * si + b * sj;
        top = std::max(top, logw[xi][xj]);
      }
    }
    double z = 0.0;
    JointTable table{};
    for (int xi = 0; xi < 2; ++xi) {
      for (int xj = 0; xj < 2; ++xj) {
        table[xi][xj] = std::exp(logw[xi][xj] - top);
        z += table[xi][xj];
      }
    }
    for (auto& row : table) {
      for (auto& cell : row) cell /= z;
    }
    out.push_back({model.edges[e].i, model.edges[e].j, table});
  }
  return out;
}

double bethe_free_energy(const PairwiseModel& model, const MessageSet& messages) {
  require_message_count(model, messages);
  const MessageGraph graph(model);
  const auto deg = degrees(model);
  double internal = 0.0;
  double entropy = 0.0;
  for (std::size_t i = 0; i < model.variable_count(); ++i) {
    const double p1 = p_congested_from_field(graph.local_field(messages, i));
    const double p0 = p_congested_from_field(-graph.local_field(messages, i));
    internal -= model.fields[i] * (p0 - p1);
    entropy += (static_cast<double>(deg[i]) - 1.0) * (xlogx(p0) + xlogx(p1));
  }
  const auto pairs = pair_beliefs(model, messages);
  for (std::size_t e = 0; e < pairs.size(); ++e) {
    const auto& t = pairs[e].table;
    internal -= model.edges[e].J * (t[0][0] + t[1][1] - t[0][1] - t[1][0]);
    for (const auto& row : t) {
      for (const double cell : row) entropy -= xlogx(cell);
    }
  }
  return internal - entropy;
}

std::vector<PhasePoint> phase_scan(const GraphSpec& family, std::span<const double> couplings,
                                   const BpParams& params, std::uint64_t seed) {
  const SpaceTimeIndex index(gen_graph(family), 1);
  const std::vector<double> zero_temporal(index.segment_count(), 0.0);
  const std::vector<double> zero_field(index.variable_count(), 0.0);
  BpParams run_params = params;
  run_params.init.seed = seed;

  std::vector<PhasePoint> out;
  out.reserve(couplings.size());
  for (const double coupling : couplings) {
    const std::vector<double> spatial(index.pairs().size(), coupling);
    const PairwiseModel model = assemble_model(index, spatial, zero_temporal, zero_field);
    const BpResult run = run_bp(model, run_params);
    const MessageGraph graph(model);
    double sum = 0.0;
    for (std::size_t i = 0; i < model.variable_count(); ++i) {
      sum += std::tanh(graph.local_field(run.messages, i));
    }
    out.push_back({coupling, std::abs(sum / static_cast<double>(model.variable_count())),
                   run.report.converged});
  }
  return out;
}

}  // namespace trafficbp
