#include <gtest/gtest.h>

#include "carserver/metamodel.hpp"
#include "carserver/schema.hpp"
#include "carserver/text.hpp"
#include "generators.hpp"

using namespace carserver;
using namespace carserver::metamodel;

namespace {

bool has_violation(const std::vector<StructuralViolation>& vs, const std::string& id,
                   ViolationKind kind) {
  for (const auto& v : vs)
    if (v.elementId == id && v.kind == kind) return true;
  return false;
}

}  // namespace

TEST(Metamodel, ConformsToCategories) {
  EXPECT_TRUE(conforms_to(ElementType::Camera, "Sensor"));
  EXPECT_TRUE(conforms_to(ElementType::Camera, "Camera"));
  EXPECT_TRUE(conforms_to(ElementType::ZoneController, "ProcessingNode"));
  EXPECT_TRUE(conforms_to(ElementType::ProcessingTask, "SoftwareComponent"));
  EXPECT_TRUE(conforms_to(ElementType::Feature, "Element"));
  EXPECT_FALSE(conforms_to(ElementType::Radar, "Camera"));
  EXPECT_FALSE(conforms_to(ElementType::Actuator, "Sensor"));
}

TEST(Metamodel, TypeNamesRoundTrip) {
  for (ElementType t : kAllElementTypes) EXPECT_EQ(parse_element_type(type_name(t)), t);
  EXPECT_EQ(type_name(ElementType::Lidar), "LIDAR");
  EXPECT_FALSE(parse_element_type("Lidar").has_value());
}

TEST(Metamodel, RandomInstancesAreStructurallyValid) {
  testkit::Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    const auto inst = testkit::random_instance(rng);
    const auto vs = validate_structure(inst);
    ASSERT_TRUE(vs.empty()) << vs.front().elementId << ": " << vs.front().message;
  }
}

TEST(Metamodel, DuplicateIdAcrossTypes) {
  ModelInstance inst;
  Camera c;
  c.id = "dup";
  c.width = c.height = 1;
  c.fov = Decimal::from_units(1);
  inst.add(c);
  Radar r;
  r.id = "dup";
  r.range = Decimal::from_units(1);
  inst.add(r);
  EXPECT_TRUE(has_violation(validate_structure(inst), "dup", ViolationKind::Identity));
}

TEST(Metamodel, DanglingAndMistypedReferences) {
  ModelInstance inst;
  Feature f;
  f.id = "f";
  f.cameras = {"nowhere"};
  inst.add(f);
  Radar r;
  r.id = "r1";
  r.range = Decimal::from_units(1);
  inst.add(r);
  f.id = "g";
  f.cameras = {"r1"};
  inst.add(f);
  const auto vs = validate_structure(inst);
  EXPECT_TRUE(has_violation(vs, "f", ViolationKind::Reference));
  EXPECT_TRUE(has_violation(vs, "g", ViolationKind::Reference));
}

TEST(Metamodel, RangeAndShapeViolations) {
  ModelInstance inst;
  Camera c;
  c.id = "c";
  c.fov = Decimal::from_units(400);
  inst.add(c);
  ApplicationContainer a;
  a.id = "a";
  a.communicationPorts = {80, 80, 70000};
  inst.add(a);
  ProcessingTask t;
  t.id = "t";
  t.inputs = {"x"};
  inst.add(t);
  Scenario s;
  s.id = "s";
  inst.add(s);
  const auto vs = validate_structure(inst);
  EXPECT_TRUE(has_violation(vs, "c", ViolationKind::Range));
  EXPECT_TRUE(has_violation(vs, "a", ViolationKind::Shape));   // empty image, repeated port
  EXPECT_TRUE(has_violation(vs, "a", ViolationKind::Domain));  // port outside [1, 65535]
  EXPECT_TRUE(has_violation(vs, "t", ViolationKind::Shape));
  EXPECT_TRUE(has_violation(vs, "s", ViolationKind::Shape));
}

TEST(Metamodel, NegativeQuantitiesAreDomainViolations) {
  ModelInstance inst;
  ZoneController z;
  z.id = "z";
  z.memoryCapacity = -1;
  inst.add(z);
  EXPECT_TRUE(has_violation(validate_structure(inst), "z", ViolationKind::Domain));
}

TEST(Metamodel, ElementsAreOrderedByTypeThenId) {
  ModelInstance inst;
  Radar r;
  r.id = "a";
  inst.add(r);
  Camera c2;
  c2.id = "z";
  inst.add(c2);
  Camera c1;
  c1.id = "m";
  inst.add(c1);
  std::vector<std::string> ids;
  for (const auto& e : inst.elements()) ids.push_back(element_id(e));
  EXPECT_EQ(ids, (std::vector<std::string>{"m", "z", "a"}));
  EXPECT_EQ(inst.elements_of("Sensor").size(), 3u);
  EXPECT_EQ(element_type_of(inst, "a"), "RADAR");
}

TEST(Metamodel, CheckedInDescriptionIsCurrent) {
  EXPECT_EQ(text::read_file(testkit::source_dir() / "data" / "carserver-metamodel.txt"),
            describe_metamodel());
}

TEST(Schema, FieldsAreReadableAndWritable) {
  Camera c;
  c.id = "cam";
  ElementRef ref = &c;
  EXPECT_EQ(std::get<std::int64_t>(get_field(ref, "width")), 0);
  EXPECT_TRUE(std::holds_alternative<std::monostate>(get_field(ref, "controllerId")));
  EXPECT_EQ(std::get<std::string>(get_field(ref, "id")), "cam");
}
