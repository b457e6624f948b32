#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "trafficbp/mrf.hpp"
#include "trafficbp/netgraph.hpp"

namespace trafficbp {

/// Cavity fields are clipped to [-kMaxCavityField, kMaxCavityField];
/// tanh(30) is 1 to double precision.
inline constexpr double kMaxCavityField = 30.0;

/// Scalar cavity fields, one per directed edge. For model edge e = (i, j)
/// the slot 2e holds u_{i->j} and 2e+1 holds u_{j->i}. The message to the
/// receiver is m(s) ∝ exp(u s).
struct MessageSet {
  std::vector<double> cavity;

  bool operator==(const MessageSet&) const = default;
};

inline constexpr std::size_t reverse_edge(std::size_t directed) noexcept { return directed ^ 1U; }

enum class Schedule { flooding, sequential };

struct MessageInit {
  enum class Kind { zero, random };
  Kind kind = Kind::zero;
  std::uint64_t seed = 0;
  double amplitude = 0.0;
};

struct BpParams {
  double damping = 0.5;
  double tolerance = 1e-8;
  std::size_t max_iterations = 1000;
  Schedule schedule = Schedule::flooding;
  MessageInit init{};
  /// Threads used by the flooding schedule; results do not depend on it.
  std::size_t workers = 1;
};

/// Throws ParameterError for out-of-range controls.
void validate(const BpParams& params);

struct BpReport {
  bool converged = false;
  std::size_t iterations = 0;
  /// Largest undamped change max |u_new - u| over directed edges, measured on
  /// the returned messages.
  double residual = 0.0;
  std::chrono::duration<double> wall_time{0.0};
};

struct PairBelief {
  std::size_t i;
  std::size_t j;
  JointTable table;
};

struct Beliefs {
  std::vector<double> p_congested;
  std::vector<PairBelief> pairs;  // optional; empty unless requested

  /// m_i = 1 - 2 p_i.
  double magnetization(std::size_t variable) const noexcept {
    return 1.0 - 2.0 * p_congested[variable];
  }
};

struct BpResult {
  Beliefs beliefs;
  MessageSet messages;
  BpReport report;
};

/// Incoming directed edges per variable, precomputed once per model.
class MessageGraph {
 public:
  explicit MessageGraph(const PairwiseModel& model);

  const PairwiseModel& model() const noexcept { return *model_; }
  std::size_t directed_edge_count() const noexcept { return 2 * model_->edges.size(); }

  std::size_t sender(std::size_t directed) const noexcept;
  std::size_t receiver(std::size_t directed) const noexcept;
  double coupling(std::size_t directed) const noexcept { return model_->edges[directed / 2].J; }

  /// Directed edges k->v into v, ascending.
  std::span<const std::size_t> incoming(std::size_t variable) const noexcept;

  /// H_v = h_v + Σ_k u_{k->v}.
  double local_field(const MessageSet& messages, std::size_t variable) const noexcept;
  /// H_{i\j} = h_i + Σ_{k≠j} u_{k->i} for directed edge i->j.
  double cavity_local_field(const MessageSet& messages, std::size_t directed) const noexcept;

 private:
  const PairwiseModel* model_;
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> incoming_;
};

/// Sum-product update for a binary pairwise model,
///   u = atanh( tanh(J) tanh(H) ),
/// evaluated as (log cosh(J + H) - log cosh(J - H)) / 2, which is the same
/// function without the overflow of atanh near ±1. Clipped to kMaxCavityField.
double cavity_update(double coupling, double cavity_local_field) noexcept;

/// New cavity field for one directed edge; does not modify `messages`.
double update_message(const MessageGraph& graph, const MessageSet& messages,
                      std::size_t directed);

MessageSet initial_messages(const PairwiseModel& model, const MessageInit& init);

/// Loopy BP. Flooding reads only the previous sweep's messages; sequential
/// updates directed edges in place in ascending slot order. Each iteration
/// first measures the undamped residual; if it is within tolerance the run
/// stops with the current messages, otherwise u <- (1-δ) u_new + δ u.
/// Non-convergence is reported, not thrown.
BpResult run_bp(const PairwiseModel& model, const BpParams& params);
BpResult run_bp(const PairwiseModel& model, const BpParams& params, MessageSet initial);

/// p_i = (1 - tanh H_i) / 2.
std::vector<double> variable_beliefs(const MessageGraph& graph, const MessageSet& messages);

/// b_ij(s_i, s_j) ∝ exp(J s_i s_j + H_{i\j} s_i + H_{j\i} s_j), one per model edge.
std::vector<PairBelief> pair_beliefs(const PairwiseModel& model, const MessageSet& messages);

/// Bethe free energy F = U - S evaluated on the beliefs induced by `messages`.
double bethe_free_energy(const PairwiseModel& model, const MessageSet& messages);

struct PhasePoint {
  double coupling;
  double abs_magnetization;
  bool converged;
};

/// Zero-field, uniform-coupling BP sweep over `couplings` on one generated
/// graph. |m̄| = |(1/N) Σ_i tanh H_i|. Messages start from
/// initial_messages(params.init) with init.seed = seed.
std::vector<PhasePoint> phase_scan(const GraphSpec& family, std::span<const double> couplings,
                                   const BpParams& params, std::uint64_t seed);

}  // namespace trafficbp
