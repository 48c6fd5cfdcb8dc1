#pragma once

// Exact container-to-node placement.
//
// Decision variable a[i][j] = 1 when component j runs on node i. A matrix is
// feasible when every column sums to one and, per node i:
//   sum_j memoryDemand[j]     * a[i][j] <= memoryCapacity[i]
//   sum_j bandwidthDemand[j]  * a[i][j] <= maxBandwidth[i]
//   sum_j processingDemand[j] * a[i][j] <= processingPower[i]
// and per assignment the realtime flags and architectures agree.

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "carserver/decimal.hpp"
#include "carserver/metamodel.hpp"

namespace carserver::allocator {

enum class Objective { PerAssignmentCost, NodeActivationCost };
enum class RealtimeSemantics { ExactMatch, RequirementImpliesCapability };

std::string_view to_string(Objective o);
std::string_view to_string(RealtimeSemantics r);
/// Accepts PER_ASSIGNMENT_COST / NODE_ACTIVATION_COST (and the short forms
/// per-assignment / node-activation).
std::optional<Objective> parse_objective(std::string_view s);
/// Accepts EXACT_MATCH / REQUIREMENT_IMPLIES_CAPABILITY (and exact / implies).
std::optional<RealtimeSemantics> parse_realtime(std::string_view s);

struct Node {
  std::string id;
  std::int64_t memoryCapacity = 0;
  std::int64_t processingPower = 0;
  Decimal maxBandwidth;
  metamodel::Architecture architecture = metamodel::Architecture::X86;
  bool realtimeCapability = false;
  Decimal cost;
};

struct Component {
  std::string id;
  std::int64_t memoryDemand = 0;
  std::int64_t processingDemand = 0;
  Decimal bandwidthDemand;
  bool realtimeRequired = false;
  /// nullopt matches every node architecture.
  std::optional<metamodel::Architecture> architecture;
};

struct Problem {
  std::vector<Node> nodes;
  std::vector<Component> components;
  Objective objective = Objective::PerAssignmentCost;
  RealtimeSemantics realtime = RealtimeSemantics::ExactMatch;
};

/// n x m matrix of 0/1 entries, rows are nodes.
using Matrix = std::vector<std::vector<int>>;

struct Allocation {
  Matrix matrix;
  /// assignment[j] = node index hosting component j.
  std::vector<std::size_t> assignment;
  Decimal objective;

  bool operator==(const Allocation&) const = default;
};

enum class ViolationKind { Memory, Bandwidth, Processing, Realtime, Architecture, Placement };
std::string_view to_string(ViolationKind k);

struct ConstraintViolation {
  ViolationKind kind = ViolationKind::Placement;
  /// Offending node; for Placement the node is meaningless and set to npos.
  std::size_t nodeIndex = static_cast<std::size_t>(-1);
  /// Offending component for per-assignment and Placement violations; npos
  /// for capacity sums.
  std::size_t componentIndex = static_cast<std::size_t>(-1);
  std::string detail;
};

struct Infeasible {
  /// Component that fits no node even on its own, when one exists.
  std::optional<std::size_t> componentIndex;
  std::optional<ViolationKind> reason;
  std::string detail;
};

using Result = std::variant<Allocation, Infeasible>;

/// Throws DimensionMismatch when the matrix shape is not n x m or an entry
/// is not 0/1.
std::vector<ConstraintViolation> check_constraints(const Problem& problem, const Matrix& matrix);

/// Throws DimensionMismatch on shape errors.
Decimal objective_value(const Problem& problem, const Matrix& matrix);

/// Depth-first branch and bound. Ties are broken towards the
/// lexicographically smallest assignment vector.
Result solve(const Problem& problem);

/// Exhaustive enumeration; reference semantics for solve. Throws
/// InvalidArgument when there are no nodes or no components and
/// InstanceTooLarge when n^m exceeds 10^7.
Result brute_force(const Problem& problem);

/// Nodes are ZoneControllers then CoProcessors, components are
/// ApplicationContainers then ProcessingTasks, each group ordered by id.
/// Throws InvalidInstance when either list would be empty.
Problem problem_from_instance(const metamodel::ModelInstance& instance,
                              Objective objective = Objective::PerAssignmentCost,
                              RealtimeSemantics realtime = RealtimeSemantics::ExactMatch);

Matrix to_matrix(const std::vector<std::size_t>& assignment, std::size_t nodes);

/// {"allocation": [[...]], "objective": "...", "mode": ..., "realtime": ...,
///  "nodes": [...], "components": [...]} for successes; infeasible results
/// carry "infeasible": true and the witness.
std::string to_json(const Problem& problem, const Result& result);

}  // namespace carserver::allocator
