#include <gtest/gtest.h>

#include "carserver/ocl.hpp"
#include "ocl_oracle.hpp"

using namespace carserver;

namespace {

testkit::Outcome to_outcome(ocl::Verdict v) {
  switch (v) {
    case ocl::Verdict::Pass: return testkit::Outcome::True;
    case ocl::Verdict::Fail: return testkit::Outcome::False;
    case ocl::Verdict::Error: return testkit::Outcome::Error;
  }
  return testkit::Outcome::Error;
}

}  // namespace

// The library evaluator and the struct-reading rational oracle must agree on
// every element of every randomly generated invariant.
TEST(OclCrossCheck, RandomInvariantsAgreeWithOracle) {
  testkit::Rng rng(31337);
  int errors_seen = 0;
  int falses_seen = 0;
  for (int i = 0; i < 1500; ++i) {
    const auto inst = testkit::oracle_instance(rng);
    const auto c = testkit::random_ocl_case(rng, inst);
    const auto parsed = ocl::parse_ocl(c.source);
    ASSERT_TRUE(parsed.ok()) << c.source << parsed.format_diagnostics();
    const auto verdicts = ocl::evaluate(parsed.document->invariants.at(0), inst);
    ASSERT_EQ(verdicts.size(), c.expected.size()) << c.source;
    for (const auto& v : verdicts) {
      const auto expected = c.expected.at(v.elementId);
      ASSERT_EQ(to_outcome(v.verdict), expected)
          << c.source << "element " << v.elementId << " detail " << v.detail;
      errors_seen += expected == testkit::Outcome::Error;
      falses_seen += expected == testkit::Outcome::False;
    }
  }
  // The generator must exercise the interesting outcomes, not just passes.
  EXPECT_GT(errors_seen, 20);
  EXPECT_GT(falses_seen, 200);
}

TEST(OclCrossCheck, ReparsingFormattedSourceIsStable) {
  testkit::Rng rng(99);
  for (int i = 0; i < 200; ++i) {
    const auto inst = testkit::oracle_instance(rng);
    const auto c = testkit::random_ocl_case(rng, inst);
    EXPECT_TRUE(ocl::is_syntactically_valid(c.source)) << c.source;
  }
}
