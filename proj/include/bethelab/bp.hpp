#pragma once

// The Belief Propagation operator on M(G), its fixed-point iteration and the
// residual of the canonical messages.

#include <cstdint>

#include "bethelab/graph.hpp"
#include "bethelab/measure.hpp"
#include "bethelab/messages.hpp"

namespace bethelab {

/// (1/|V|) sum over incidences of TV in both directions.
double message_metric(const MessageSet& nu, const MessageSet& other);

/// One synchronous BP update. Throws ZeroNormalizer when a hard pin meets
/// incoming messages that exclude its spin.
MessageSet bp_step(const FactorGraph& g, const MessageSet& nu);

/// Every message drawn uniformly from the simplex interior (seeded).
MessageSet random_messages(const FactorGraph& g, std::uint64_t seed);

struct BpResult {
  MessageSet messages;
  double residual = 0.0;  // message_metric(nu, BP(nu)) at the returned nu
  int iterations = 0;
  bool converged = false;
};

/// nu <- (1 - damping) BP(nu) + damping nu until the residual drops below
/// tol or max_iters updates have been made.
BpResult bp_iterate(const FactorGraph& g, MessageSet nu0, double damping, int max_iters,
                    double tol);

/// message_metric(nu, BP(nu)) for the standard messages given S.
double canonical_residual(const FactorGraph& g, const Event& S, const Budget& budget = {});
double canonical_residual(const FactorGraph& g, const MessageSet& canonical);

/// Potts form of the residual: (1/n) sum over directed edges v -> w and
/// colors of |mu_{v->w}(omega) - normalized prod_{u in dv - w} (1 - (1 -
/// e^-beta) mu_{u->v}(omega))|. Self-loops carry a constant weight and are
/// skipped.
double potts_bp_residual(const FactorGraph& g, double beta, const MessageSet& canonical);
double potts_bp_residual(const FactorGraph& g, double beta, const Event& S,
                         const Budget& budget = {});

}  // namespace bethelab
