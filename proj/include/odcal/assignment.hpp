#pragma once

#include <odcal/routing.hpp>

#include <span>
#include <vector>

namespace odcal {

/// Probabilistic demand-to-sensor mapping.
///
/// `alpha(m, k)` is the probability that a trip of OD pair m enters sensor k
/// within the frame; `route_probs[m]` holds the route choice probabilities over
/// the route set the matrix was built from.
struct AssignmentMatrix {
    SparseMatrixXd alpha;
    std::vector<VectorXd> route_probs;
};

/// Logit route choice probabilities exp(gamma * theta_i) / sum_s exp(gamma * theta_s).
/// Negative gamma makes longer routes less likely.
VectorXd logit_probs(std::span<const double> thetas, double gamma);

/// Probability that a uniformly timed departure reaches a point `theta` seconds
/// downstream before the frame of length `delta` ends.
inline double crossing_prob(double delta, double theta)
{
    return delta > theta ? (delta - theta) / delta : 0.0;
}

/// Route costs of every stored route, indexed like `db.routes`.
std::vector<std::vector<RouteCosts>> all_route_costs(const RouteDb& db, const Network& net, const VectorXd& tau);

AssignmentMatrix build_assignment(const RouteDb& db, const std::vector<std::vector<RouteCosts>>& costs,
                                  Index num_sensors, double gamma, double delta);

/// Expected sensor hits of an OD vector: A^T x.
VectorXd expected_counts(const AssignmentMatrix& a, const VectorXd& od);

/// Seed OD: the normalized distribution scaled so that its expected sensor hits
/// equal the observed count total. All-zero counts give the zero vector.
VectorXd seed_od(const VectorXd& nod, const AssignmentMatrix& a, const VectorXd& counts);

} // namespace odcal
