#include <gtest/gtest.h>

#include <json.hpp>

#include "carserver/allocator.hpp"
#include "carserver/error.hpp"
#include "carserver/xmi.hpp"
#include "generators.hpp"

using namespace carserver;
using namespace carserver::allocator;

namespace {

Node node(const std::string& id, std::int64_t cost, bool rt = false) {
  Node n;
  n.id = id;
  n.memoryCapacity = 8192;
  n.processingPower = 4000;
  n.maxBandwidth = Decimal::from_units(1000);
  n.realtimeCapability = rt;
  n.cost = Decimal::from_units(cost);
  return n;
}

Component comp(const std::string& id, std::int64_t mem = 512, bool rt = false) {
  Component c;
  c.id = id;
  c.memoryDemand = mem;
  c.processingDemand = 100;
  c.bandwidthDemand = Decimal::from_units(10);
  c.realtimeRequired = rt;
  return c;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Io;
}

}  // namespace

TEST(AllocatorObjective, LiteralSumVersusActivation) {
  Problem p;
  p.nodes = {node("only", 10)};
  p.components = {comp("a"), comp("b"), comp("c")};
  const Matrix all_on_one = {{1, 1, 1}};
  p.objective = Objective::PerAssignmentCost;
  EXPECT_EQ(objective_value(p, all_on_one), Decimal::from_units(30));
  p.objective = Objective::NodeActivationCost;
  EXPECT_EQ(objective_value(p, all_on_one), Decimal::from_units(10));
}

TEST(AllocatorObjective, ShapeErrors) {
  Problem p;
  p.nodes = {node("n", 1)};
  p.components = {comp("a")};
  EXPECT_EQ(code_of([&] { objective_value(p, {{1, 0}}); }), ErrorCode::DimensionMismatch);
  EXPECT_EQ(code_of([&] { check_constraints(p, {{2}}); }), ErrorCode::DimensionMismatch);
  EXPECT_EQ(code_of([&] { check_constraints(p, {}); }), ErrorCode::DimensionMismatch);
}

TEST(AllocatorConstraints, ReportsEachKind) {
  Problem p;
  p.nodes = {node("n0", 1, false)};
  p.nodes[0].memoryCapacity = 100;
  p.nodes[0].architecture = metamodel::Architecture::ARM;
  Component c = comp("c", 512, true);
  c.architecture = metamodel::Architecture::X86;
  p.components = {c, comp("d")};
  const auto vs = check_constraints(p, {{1, 0}});
  std::set<ViolationKind> kinds;
  for (const auto& v : vs) kinds.insert(v.kind);
  EXPECT_TRUE(kinds.count(ViolationKind::Memory));
  EXPECT_TRUE(kinds.count(ViolationKind::Realtime));
  EXPECT_TRUE(kinds.count(ViolationKind::Architecture));
  EXPECT_TRUE(kinds.count(ViolationKind::Placement));  // d unplaced
}

TEST(AllocatorConstraints, RealtimeSemantics) {
  Problem p;
  p.nodes = {node("rt", 1, true)};
  p.components = {comp("plain", 1, false)};
  p.realtime = RealtimeSemantics::ExactMatch;
  EXPECT_EQ(check_constraints(p, {{1}}).size(), 1u);
  p.realtime = RealtimeSemantics::RequirementImpliesCapability;
  EXPECT_TRUE(check_constraints(p, {{1}}).empty());
}

TEST(AllocatorSolve, PrefersCheaperNodeAndBreaksTiesLexicographically) {
  Problem p;
  p.nodes = {node("expensive", 5), node("cheap", 1), node("cheap-too", 1)};
  p.components = {comp("a"), comp("b")};
  const auto r = solve(p);
  ASSERT_TRUE(std::holds_alternative<Allocation>(r));
  const auto& a = std::get<Allocation>(r);
  EXPECT_EQ(a.assignment, (std::vector<std::size_t>{1, 1}));
  EXPECT_EQ(a.objective, Decimal::from_units(2));
  EXPECT_EQ(a.matrix, (Matrix{{0, 0}, {1, 1}, {0, 0}}));
}

TEST(AllocatorSolve, CapacityForcesSpread) {
  Problem p;
  p.nodes = {node("a", 1), node("b", 2)};
  p.nodes[0].memoryCapacity = 1000;
  p.components = {comp("x", 600), comp("y", 600)};
  const auto r = solve(p);
  const auto& a = std::get<Allocation>(r);
  EXPECT_EQ(a.objective, Decimal::from_units(3));
  EXPECT_TRUE(check_constraints(p, a.matrix).empty());
}

TEST(AllocatorSolve, InfeasibleWitness) {
  Problem p;
  p.nodes = {node("n", 1, false)};
  p.components = {comp("ok"), comp("needs-rt", 1, true)};
  const auto r = solve(p);
  ASSERT_TRUE(std::holds_alternative<Infeasible>(r));
  const auto& inf = std::get<Infeasible>(r);
  EXPECT_EQ(inf.componentIndex, 1u);
  EXPECT_EQ(inf.reason, ViolationKind::Realtime);
}

TEST(AllocatorSolve, JointInfeasibilityHasNoSingleCulprit) {
  Problem p;
  p.nodes = {node("n", 1)};
  p.nodes[0].memoryCapacity = 1000;
  p.components = {comp("x", 600), comp("y", 600)};
  const auto r = solve(p);
  ASSERT_TRUE(std::holds_alternative<Infeasible>(r));
  EXPECT_FALSE(std::get<Infeasible>(r).componentIndex.has_value());
}

TEST(AllocatorSolve, NoComponentsIsTrivial) {
  Problem p;
  p.nodes = {node("n", 1)};
  const auto r = solve(p);
  const auto& a = std::get<Allocation>(r);
  EXPECT_TRUE(a.assignment.empty());
  EXPECT_EQ(a.objective, Decimal());
}

TEST(AllocatorBruteForce, Limits) {
  Problem p;
  EXPECT_EQ(code_of([&] { brute_force(p); }), ErrorCode::InvalidArgument);
  p.nodes = {node("a", 1), node("b", 1), node("c", 1), node("d", 1)};
  for (int j = 0; j < 12; ++j) p.components.push_back(comp("c" + std::to_string(j)));
  EXPECT_EQ(code_of([&] { brute_force(p); }), ErrorCode::InstanceTooLarge);
}

TEST(AllocatorModes, ParseNames) {
  EXPECT_EQ(parse_objective("NODE_ACTIVATION_COST"), Objective::NodeActivationCost);
  EXPECT_EQ(parse_objective("per-assignment"), Objective::PerAssignmentCost);
  EXPECT_FALSE(parse_objective("cheapest").has_value());
  EXPECT_EQ(parse_realtime("implies"), RealtimeSemantics::RequirementImpliesCapability);
  EXPECT_FALSE(parse_realtime("maybe").has_value());
}

TEST(AllocatorInstance, ProblemFromFixture) {
  const auto inst = xmi::load_instance(testkit::data_dir() / "emergency_brake.carxmi");
  const auto p = problem_from_instance(inst);
  ASSERT_EQ(p.nodes.size(), 2u);
  EXPECT_EQ(p.nodes[0].id, "back");
  EXPECT_EQ(p.components[1].id, "cam-container");
  EXPECT_EQ(p.components[1].memoryDemand, 2048);
  EXPECT_EQ(code_of([] { problem_from_instance(metamodel::ModelInstance{}); }),
            ErrorCode::InvalidInstance);
}

TEST(AllocatorReport, JsonShape) {
  const auto inst = xmi::load_instance(testkit::data_dir() / "emergency_brake.carxmi");
  const auto p = problem_from_instance(inst);
  const auto j = nlohmann::json::parse(to_json(p, solve(p)));
  EXPECT_EQ(j["objective"], 24);
  EXPECT_EQ(j["mode"], "PER_ASSIGNMENT_COST");
  EXPECT_EQ(j["placement"]["cam-container"], "front");
  EXPECT_EQ(j["placement"]["rearcam-container"], "back");
  EXPECT_EQ(j["allocation"].size(), 2u);

  const auto bad = xmi::load_instance(testkit::data_dir() / "infeasible.carxmi");
  const auto pb = problem_from_instance(bad);
  const auto jb = nlohmann::json::parse(to_json(pb, solve(pb)));
  EXPECT_EQ(jb["infeasible"], true);
  EXPECT_EQ(jb["witness"]["component"], "cam-container");
  EXPECT_EQ(jb["witness"]["reason"], "ARCHITECTURE");
}

TEST(AllocatorReport, FractionalObjective) {
  Problem p;
  p.nodes = {node("n", 0)};
  p.nodes[0].cost = Decimal::from_raw(2'500'000);
  p.components = {comp("a")};
  const auto j = nlohmann::json::parse(to_json(p, solve(p)));
  EXPECT_DOUBLE_EQ(j["objective"].get<double>(), 2.5);
}
