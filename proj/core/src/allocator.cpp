#include "carserver/allocator.hpp"

#include <algorithm>
#include <numeric>

#include <json.hpp>

#include "carserver/error.hpp"

namespace carserver::allocator {

namespace {

constexpr std::size_t kNone = static_cast<std::size_t>(-1);
constexpr double kBruteForceLimit = 1e7;

void check_shape(const Problem& p, const Matrix& m) {
  if (m.size() != p.nodes.size())
    throw Error(ErrorCode::DimensionMismatch,
                "matrix has " + std::to_string(m.size()) + " rows, expected " +
                    std::to_string(p.nodes.size()));
  for (const auto& row : m) {
    if (row.size() != p.components.size())
      throw Error(ErrorCode::DimensionMismatch,
                  "matrix row has " + std::to_string(row.size()) + " columns, expected " +
                      std::to_string(p.components.size()));
    for (int v : row)
      if (v != 0 && v != 1)
        throw Error(ErrorCode::DimensionMismatch, "matrix entries must be 0 or 1");
  }
}

bool realtime_ok(const Problem& p, const Node& n, const Component& c) {
  if (p.realtime == RealtimeSemantics::ExactMatch) return n.realtimeCapability == c.realtimeRequired;
  return !c.realtimeRequired || n.realtimeCapability;
}

bool architecture_ok(const Node& n, const Component& c) {
  return !c.architecture || *c.architecture == n.architecture;
}

bool fits_alone(const Node& n, const Component& c) {
  return c.memoryDemand <= n.memoryCapacity && c.bandwidthDemand <= n.maxBandwidth &&
         c.processingDemand <= n.processingPower;
}

bool compatible(const Problem& p, const Node& n, const Component& c) {
  return architecture_ok(n, c) && realtime_ok(p, n, c) && fits_alone(n, c);
}

std::string flag(bool b) { return b ? "1" : "0"; }

/// First component that has no compatible node even in isolation.
std::optional<Infeasible> witness(const Problem& p) {
  for (std::size_t j = 0; j < p.components.size(); ++j) {
    const Component& c = p.components[j];
    bool any = false;
    for (const Node& n : p.nodes) any = any || compatible(p, n, c);
    if (any) continue;

    Infeasible inf;
    inf.componentIndex = j;
    auto filter = [&](auto pred) {
      std::vector<const Node*> out;
      for (const Node& n : p.nodes)
        if (pred(n)) out.push_back(&n);
      return out;
    };
    const auto arch = filter([&](const Node& n) { return architecture_ok(n, c); });
    const auto rt = filter([&](const Node& n) { return architecture_ok(n, c) && realtime_ok(p, n, c); });
    const auto mem = filter([&](const Node& n) {
      return architecture_ok(n, c) && realtime_ok(p, n, c) && c.memoryDemand <= n.memoryCapacity;
    });
    const auto bw = filter([&](const Node& n) {
      return architecture_ok(n, c) && realtime_ok(p, n, c) && c.memoryDemand <= n.memoryCapacity &&
             c.bandwidthDemand <= n.maxBandwidth;
    });
    if (arch.empty()) {
      inf.reason = ViolationKind::Architecture;
      inf.detail = "component " + c.id + " requires architecture " +
                   std::string(metamodel::to_string(*c.architecture)) + " which no node provides";
    } else if (rt.empty()) {
      inf.reason = ViolationKind::Realtime;
      inf.detail = "component " + c.id + " (realtimeRequired=" + flag(c.realtimeRequired) +
                   ") has no node with matching realtime capability";
    } else if (mem.empty()) {
      inf.reason = ViolationKind::Memory;
      inf.detail = "component " + c.id + " needs memory " + std::to_string(c.memoryDemand) +
                   " which exceeds every compatible node";
    } else if (bw.empty()) {
      inf.reason = ViolationKind::Bandwidth;
      inf.detail = "component " + c.id + " needs bandwidth " + c.bandwidthDemand.to_string() +
                   " which exceeds every compatible node";
    } else {
      inf.reason = ViolationKind::Processing;
      inf.detail = "component " + c.id + " needs processing " +
                   std::to_string(c.processingDemand) + " which exceeds every compatible node";
    }
    return inf;
  }
  return std::nullopt;
}

Decimal objective_of(const Problem& p, const std::vector<std::size_t>& assignment) {
  Decimal total;
  if (p.objective == Objective::PerAssignmentCost) {
    for (std::size_t i : assignment) total += p.nodes[i].cost;
  } else {
    std::vector<bool> used(p.nodes.size(), false);
    for (std::size_t i : assignment) used[i] = true;
    for (std::size_t i = 0; i < p.nodes.size(); ++i)
      if (used[i]) total += p.nodes[i].cost;
  }
  return total;
}

Allocation make_allocation(const Problem& p, std::vector<std::size_t> assignment) {
  Allocation a;
  a.matrix = to_matrix(assignment, p.nodes.size());
  a.objective = objective_of(p, assignment);
  a.assignment = std::move(assignment);
  return a;
}

class BranchAndBound {
 public:
  explicit BranchAndBound(const Problem& p) : p_(p) {
    const std::size_t m = p.components.size();
    order_.resize(m);
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::stable_sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
      return p.components[a].memoryDemand > p.components[b].memoryDemand;
    });
    candidates_.resize(m);
    std::vector<Decimal> min_cost(m);
    for (std::size_t j = 0; j < m; ++j) {
      for (std::size_t i = 0; i < p.nodes.size(); ++i) {
        if (!compatible(p, p.nodes[i], p.components[j])) continue;
        if (candidates_[j].empty() || p.nodes[i].cost < min_cost[j]) min_cost[j] = p.nodes[i].cost;
        candidates_[j].push_back(i);
      }
    }
    // Remaining-cost bound indexed by search depth.
    remaining_.assign(m + 1, Decimal());
    if (p.objective == Objective::PerAssignmentCost)
      for (std::size_t d = m; d-- > 0;) remaining_[d] = remaining_[d + 1] + min_cost[order_[d]];
    assignment_.assign(m, kNone);
    mem_.assign(p.nodes.size(), 0);
    proc_.assign(p.nodes.size(), 0);
    bw_.assign(p.nodes.size(), Decimal());
    hosted_.assign(p.nodes.size(), 0);
  }

  std::optional<Allocation> run() {
    search(0, Decimal());
    if (!best_) return std::nullopt;
    return make_allocation(p_, *best_);
  }

 private:
  bool lexicographically_dominated() const {
    for (std::size_t j = 0; j < assignment_.size(); ++j) {
      if (assignment_[j] == kNone) return false;
      if (assignment_[j] < (*best_)[j]) return false;
      if (assignment_[j] > (*best_)[j]) return true;
    }
    return true;
  }

  void search(std::size_t depth, Decimal cost) {
    if (best_) {
      const Decimal bound = cost + remaining_[depth];
      if (bound > best_cost_) return;
      if (bound == best_cost_ && lexicographically_dominated()) return;
    }
    if (depth == order_.size()) {
      if (!best_ || cost < best_cost_ || (cost == best_cost_ && assignment_ < *best_)) {
        best_ = assignment_;
        best_cost_ = cost;
      }
      return;
    }
    const std::size_t j = order_[depth];
    const Component& c = p_.components[j];
    for (std::size_t i : candidates_[j]) {
      const Node& n = p_.nodes[i];
      if (mem_[i] + c.memoryDemand > n.memoryCapacity) continue;
      if (proc_[i] + c.processingDemand > n.processingPower) continue;
      if (bw_[i] + c.bandwidthDemand > n.maxBandwidth) continue;
      Decimal step;
      if (p_.objective == Objective::PerAssignmentCost || hosted_[i] == 0) step = n.cost;
      mem_[i] += c.memoryDemand;
      proc_[i] += c.processingDemand;
      bw_[i] += c.bandwidthDemand;
      ++hosted_[i];
      assignment_[j] = i;
      search(depth + 1, cost + step);
      assignment_[j] = kNone;
      --hosted_[i];
      bw_[i] -= c.bandwidthDemand;
      proc_[i] -= c.processingDemand;
      mem_[i] -= c.memoryDemand;
    }
  }

  const Problem& p_;
  std::vector<std::size_t> order_;
  std::vector<std::vector<std::size_t>> candidates_;
  std::vector<Decimal> remaining_;
  std::vector<std::size_t> assignment_;
  std::vector<std::int64_t> mem_;
  std::vector<std::int64_t> proc_;
  std::vector<Decimal> bw_;
  std::vector<std::size_t> hosted_;
  std::optional<std::vector<std::size_t>> best_;
  Decimal best_cost_;
};

Infeasible no_solution(const Problem& p) {
  if (auto w = witness(p)) return *w;
  return Infeasible{std::nullopt, std::nullopt,
                    "no placement satisfies the combined capacity constraints"};
}

}  // namespace

std::string_view to_string(Objective o) {
  return o == Objective::PerAssignmentCost ? "PER_ASSIGNMENT_COST" : "NODE_ACTIVATION_COST";
}

std::string_view to_string(RealtimeSemantics r) {
  return r == RealtimeSemantics::ExactMatch ? "EXACT_MATCH" : "REQUIREMENT_IMPLIES_CAPABILITY";
}

std::optional<Objective> parse_objective(std::string_view s) {
  if (s == "PER_ASSIGNMENT_COST" || s == "per-assignment") return Objective::PerAssignmentCost;
  if (s == "NODE_ACTIVATION_COST" || s == "node-activation") return Objective::NodeActivationCost;
  return std::nullopt;
}

std::optional<RealtimeSemantics> parse_realtime(std::string_view s) {
  if (s == "EXACT_MATCH" || s == "exact") return RealtimeSemantics::ExactMatch;
  if (s == "REQUIREMENT_IMPLIES_CAPABILITY" || s == "implies")
    return RealtimeSemantics::RequirementImpliesCapability;
  return std::nullopt;
}

std::string_view to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::Memory: return "MEMORY";
    case ViolationKind::Bandwidth: return "BANDWIDTH";
    case ViolationKind::Processing: return "PROCESSING";
    case ViolationKind::Realtime: return "REALTIME";
    case ViolationKind::Architecture: return "ARCHITECTURE";
    case ViolationKind::Placement: return "PLACEMENT";
  }
  return "?";
}

std::vector<ConstraintViolation> check_constraints(const Problem& p, const Matrix& m) {
  check_shape(p, m);
  std::vector<ConstraintViolation> out;
  const std::size_t n = p.nodes.size();
  const std::size_t k = p.components.size();

  for (std::size_t j = 0; j < k; ++j) {
    int sum = 0;
    for (std::size_t i = 0; i < n; ++i) sum += m[i][j];
    if (sum != 1)
      out.push_back({ViolationKind::Placement, kNone, j,
                     "component " + p.components[j].id + " placed on " + std::to_string(sum) +
                         " nodes, expected exactly 1"});
  }

  for (std::size_t i = 0; i < n; ++i) {
    const Node& node = p.nodes[i];
    std::int64_t mem = 0;
    std::int64_t proc = 0;
    Decimal bw;
    for (std::size_t j = 0; j < k; ++j) {
      if (!m[i][j]) continue;
      mem += p.components[j].memoryDemand;
      proc += p.components[j].processingDemand;
      bw += p.components[j].bandwidthDemand;
    }
    if (mem > node.memoryCapacity)
      out.push_back({ViolationKind::Memory, i, kNone,
                     "node " + node.id + ": memory " + std::to_string(mem) + " > " +
                         std::to_string(node.memoryCapacity)});
    if (bw > node.maxBandwidth)
      out.push_back({ViolationKind::Bandwidth, i, kNone,
                     "node " + node.id + ": bandwidth " + bw.to_string() + " > " +
                         node.maxBandwidth.to_string()});
    if (proc > node.processingPower)
      out.push_back({ViolationKind::Processing, i, kNone,
                     "node " + node.id + ": processing " + std::to_string(proc) + " > " +
                         std::to_string(node.processingPower)});
  }

  for (std::size_t i = 0; i < n; ++i) {
    const Node& node = p.nodes[i];
    for (std::size_t j = 0; j < k; ++j) {
      if (!m[i][j]) continue;
      const Component& c = p.components[j];
      if (!realtime_ok(p, node, c))
        out.push_back({ViolationKind::Realtime, i, j,
                       "node " + node.id + " realtimeCapability=" + flag(node.realtimeCapability) +
                           ", component " + c.id + " realtimeRequired=" +
                           flag(c.realtimeRequired)});
      if (!architecture_ok(node, c))
        out.push_back({ViolationKind::Architecture, i, j,
                       "node " + node.id + " architecture " +
                           std::string(metamodel::to_string(node.architecture)) +
                           ", component " + c.id + " requires " +
                           std::string(metamodel::to_string(*c.architecture))});
    }
  }
  return out;
}

Decimal objective_value(const Problem& p, const Matrix& m) {
  check_shape(p, m);
  Decimal total;
  for (std::size_t i = 0; i < p.nodes.size(); ++i) {
    const auto hosted = std::count(m[i].begin(), m[i].end(), 1);
    if (p.objective == Objective::PerAssignmentCost)
      total += p.nodes[i].cost * hosted;
    else if (hosted > 0)
      total += p.nodes[i].cost;
  }
  return total;
}

Matrix to_matrix(const std::vector<std::size_t>& assignment, std::size_t nodes) {
  Matrix m(nodes, std::vector<int>(assignment.size(), 0));
  for (std::size_t j = 0; j < assignment.size(); ++j) m[assignment[j]][j] = 1;
  return m;
}

Result solve(const Problem& p) {
  if (p.components.empty()) return Allocation{Matrix(p.nodes.size()), {}, Decimal()};
  if (p.nodes.empty()) return Infeasible{std::nullopt, std::nullopt, "no processing nodes"};
  if (auto w = witness(p)) return *w;
  if (auto best = BranchAndBound(p).run()) return *best;
  return no_solution(p);
}

Result brute_force(const Problem& p) {
  const std::size_t n = p.nodes.size();
  const std::size_t m = p.components.size();
  if (n == 0 || m == 0)
    throw Error(ErrorCode::InvalidArgument, "brute force requires at least one node and component");
  double space = 1;
  for (std::size_t j = 0; j < m; ++j) {
    space *= static_cast<double>(n);
    if (space > kBruteForceLimit)
      throw Error(ErrorCode::InstanceTooLarge,
                  "n^m exceeds 10^7 (n=" + std::to_string(n) + ", m=" + std::to_string(m) + ")");
  }

  std::vector<std::size_t> assignment(m, 0);
  std::optional<std::vector<std::size_t>> best;
  Decimal best_cost;
  for (;;) {
    const Matrix matrix = to_matrix(assignment, n);
    if (check_constraints(p, matrix).empty()) {
      const Decimal cost = objective_value(p, matrix);
      if (!best || cost < best_cost) {
        best = assignment;
        best_cost = cost;
      }
    }
    std::size_t pos = m;
    while (pos > 0 && ++assignment[pos - 1] == n) assignment[--pos] = 0;
    if (pos == 0) break;
  }
  if (!best) return no_solution(p);
  return make_allocation(p, *best);
}

Problem problem_from_instance(const metamodel::ModelInstance& instance, Objective objective,
                              RealtimeSemantics realtime) {
  Problem p;
  p.objective = objective;
  p.realtime = realtime;
  auto add_node = [&](const metamodel::ProcessingNode& n) {
    p.nodes.push_back({n.id, n.memoryCapacity, n.processingPower, n.maxBandwidth, n.architecture,
                       n.realtimeCapability, n.cost});
  };
  for (const auto& [id, n] : instance.zoneControllers) add_node(n);
  for (const auto& [id, n] : instance.coProcessors) add_node(n);
  for (const auto& [id, c] : instance.containers)
    p.components.push_back({c.id, c.memoryDemand, c.processingDemand, c.bandwidthDemand,
                            c.realtimeRequired, c.architecture});
  for (const auto& [id, t] : instance.tasks)
    p.components.push_back({t.id, t.memoryDemand, t.processingDemand, t.bandwidthDemand,
                            t.realtimeRequired, t.architecture});
  if (p.nodes.empty())
    throw Error(ErrorCode::InvalidInstance, "instance has no processing nodes to allocate to");
  if (p.components.empty())
    throw Error(ErrorCode::InvalidInstance, "instance has no software components to allocate");
  return p;
}

std::string to_json(const Problem& p, const Result& result) {
  using nlohmann::ordered_json;
  auto number = [](Decimal d) -> ordered_json {
    if (d.is_integral()) return d.integral_part();
    return d.to_double();
  };
  ordered_json j;
  if (const auto* a = std::get_if<Allocation>(&result)) {
    j["allocation"] = a->matrix;
    j["objective"] = number(a->objective);
  } else {
    const auto& inf = std::get<Infeasible>(result);
    j["infeasible"] = true;
    ordered_json w;
    w["component"] = inf.componentIndex ? ordered_json(p.components[*inf.componentIndex].id)
                                        : ordered_json(nullptr);
    w["reason"] = inf.reason ? ordered_json(std::string(to_string(*inf.reason)))
                             : ordered_json(nullptr);
    w["detail"] = inf.detail;
    j["witness"] = w;
  }
  j["mode"] = std::string(to_string(p.objective));
  j["realtime"] = std::string(to_string(p.realtime));
  ordered_json nodes = ordered_json::array();
  for (const auto& n : p.nodes) nodes.push_back(n.id);
  ordered_json comps = ordered_json::array();
  for (const auto& c : p.components) comps.push_back(c.id);
  j["nodes"] = nodes;
  j["components"] = comps;
  if (const auto* a = std::get_if<Allocation>(&result)) {
    ordered_json placement = ordered_json::object();
    for (std::size_t k = 0; k < a->assignment.size(); ++k)
      placement[p.components[k].id] = p.nodes[a->assignment[k]].id;
    j["placement"] = placement;
  }
  return j.dump(2) + "\n";
}

}  // namespace carserver::allocator
