#include <gtest/gtest.h>

#include <optional>

#include "carserver/allocator.hpp"
#include "generators.hpp"

using namespace carserver;
using namespace carserver::allocator;

namespace {

// Independent reference: enumerate every assignment in lexicographic order
// and keep the first one with the lowest cost.
struct Reference {
  std::optional<std::vector<std::size_t>> assignment;
  std::int64_t costMicros = 0;
};

bool fits(const Problem& p, const std::vector<std::size_t>& a) {
  const std::size_t n = p.nodes.size();
  std::vector<std::int64_t> mem(n), proc(n), bw(n);
  for (std::size_t j = 0; j < a.size(); ++j) {
    const Node& node = p.nodes[a[j]];
    const Component& c = p.components[j];
    if (c.architecture && *c.architecture != node.architecture) return false;
    const bool rt_ok = p.realtime == RealtimeSemantics::ExactMatch
                           ? c.realtimeRequired == node.realtimeCapability
                           : (!c.realtimeRequired || node.realtimeCapability);
    if (!rt_ok) return false;
    mem[a[j]] += c.memoryDemand;
    proc[a[j]] += c.processingDemand;
    bw[a[j]] += c.bandwidthDemand.raw();
  }
  for (std::size_t i = 0; i < n; ++i)
    if (mem[i] > p.nodes[i].memoryCapacity || proc[i] > p.nodes[i].processingPower ||
        bw[i] > p.nodes[i].maxBandwidth.raw())
      return false;
  return true;
}

std::int64_t cost_of(const Problem& p, const std::vector<std::size_t>& a) {
  std::int64_t total = 0;
  if (p.objective == Objective::PerAssignmentCost) {
    for (std::size_t i : a) total += p.nodes[i].cost.raw();
  } else {
    std::vector<bool> used(p.nodes.size());
    for (std::size_t i : a) used[i] = true;
    for (std::size_t i = 0; i < used.size(); ++i)
      if (used[i]) total += p.nodes[i].cost.raw();
  }
  return total;
}

Reference reference(const Problem& p) {
  Reference best;
  const std::size_t n = p.nodes.size();
  const std::size_t m = p.components.size();
  std::vector<std::size_t> a(m, 0);
  while (true) {
    if (fits(p, a)) {
      const auto c = cost_of(p, a);
      if (!best.assignment || c < best.costMicros) best = {a, c};
    }
    std::size_t k = m;
    while (k > 0 && a[k - 1] + 1 == n) a[--k] = 0;
    if (k == 0) break;
    ++a[k - 1];
  }
  return best;
}

std::optional<Decimal> optimum(const Problem& p) {
  const auto r = solve(p);
  if (auto* a = std::get_if<Allocation>(&r)) return a->objective;
  return std::nullopt;
}

}  // namespace

TEST(AllocatorProperty, SolveMatchesBruteForceAndReference) {
  testkit::Rng rng(1);
  int feasible = 0;
  for (int i = 0; i < 300; ++i) {
    const auto p = testkit::random_problem(rng, {4, 6});
    const auto s = solve(p);
    const auto b = brute_force(p);
    const auto ref = reference(p);
    ASSERT_EQ(s.index(), b.index()) << "case " << i;
    ASSERT_EQ(std::holds_alternative<Allocation>(s), ref.assignment.has_value()) << "case " << i;
    if (auto* sa = std::get_if<Allocation>(&s)) {
      const auto& ba = std::get<Allocation>(b);
      EXPECT_EQ(sa->objective, ba.objective) << "case " << i;
      EXPECT_EQ(sa->assignment, ba.assignment) << "case " << i;
      EXPECT_EQ(sa->assignment, *ref.assignment) << "case " << i;
      EXPECT_EQ(sa->objective.raw(), ref.costMicros) << "case " << i;
      ++feasible;
    }
  }
  EXPECT_GT(feasible, 50);
  EXPECT_LT(feasible, 290);
}

TEST(AllocatorProperty, SolutionsSatisfyConstraints) {
  testkit::Rng rng(2);
  for (int i = 0; i < 500; ++i) {
    const auto p = testkit::random_problem(rng, {6, 10});
    const auto r = solve(p);
    if (auto* a = std::get_if<Allocation>(&r)) {
      EXPECT_TRUE(check_constraints(p, a->matrix).empty()) << "case " << i;
      for (std::size_t j = 0; j < p.components.size(); ++j) {
        int column = 0;
        for (const auto& row : a->matrix) column += row[j];
        EXPECT_EQ(column, 1);
      }
      EXPECT_EQ(objective_value(p, a->matrix), a->objective);
    }
  }
}

TEST(AllocatorProperty, AddingANodeNeverHurts) {
  testkit::Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    auto p = testkit::random_problem(rng, {3, 5});
    const auto before = optimum(p);
    auto extra = testkit::random_problem(rng, {1, 1}).nodes.front();
    extra.id = "extra";
    p.nodes.push_back(extra);
    const auto after = optimum(p);
    if (before) {
      ASSERT_TRUE(after.has_value()) << "case " << i;
      EXPECT_LE(*after, *before) << "case " << i;
    }
  }
}

TEST(AllocatorProperty, RelaxingCapacitiesNeverHurts) {
  testkit::Rng rng(4);
  for (int i = 0; i < 200; ++i) {
    auto p = testkit::random_problem(rng, {3, 5});
    const auto before = optimum(p);
    for (auto& n : p.nodes) {
      n.memoryCapacity *= 2;
      n.processingPower *= 2;
      n.maxBandwidth = n.maxBandwidth * 2;
    }
    const auto after = optimum(p);
    if (before) {
      ASSERT_TRUE(after.has_value());
      EXPECT_LE(*after, *before);
    }
  }
}

TEST(AllocatorProperty, ActivationCostNeverExceedsPerAssignment) {
  testkit::Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    auto p = testkit::random_problem(rng, {3, 5});
    p.objective = Objective::PerAssignmentCost;
    const auto per = optimum(p);
    p.objective = Objective::NodeActivationCost;
    const auto act = optimum(p);
    ASSERT_EQ(per.has_value(), act.has_value());
    if (per) {
      EXPECT_LE(*act, *per);
    }
  }
}

TEST(AllocatorProperty, InfeasibleWitnessIsGenuine) {
  testkit::Rng rng(6);
  for (int i = 0; i < 300; ++i) {
    const auto p = testkit::random_problem(rng, {4, 6});
    const auto r = solve(p);
    const auto* inf = std::get_if<Infeasible>(&r);
    if (!inf || !inf->componentIndex) continue;
    // The named component fits no node even when placed alone.
    Problem alone = p;
    alone.components = {p.components[*inf->componentIndex]};
    EXPECT_FALSE(reference(alone).assignment.has_value()) << "case " << i;
  }
}
