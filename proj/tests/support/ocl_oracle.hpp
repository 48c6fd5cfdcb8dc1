#pragma once

// Random OCL invariants paired with a reference evaluator that reads model
// structs directly and does arithmetic in boost::rational<cpp_int>.

#include <map>
#include <string>

#include "carserver/metamodel.hpp"
#include "generators.hpp"

namespace carserver::testkit {

enum class Outcome { True, False, Error };

struct OclCase {
  /// Full `context ... inv ...:` text.
  std::string source;
  /// Context type name.
  std::string context;
  /// Expected outcome per element id of the context type.
  std::map<std::string, Outcome> expected;
};

/// Instance with cameras and features whose small attribute values make
/// equalities and divisions by zero likely.
metamodel::ModelInstance oracle_instance(Rng& rng);

/// Random invariant over Camera or Feature together with oracle verdicts
/// for every element of `instance`.
OclCase random_ocl_case(Rng& rng, const metamodel::ModelInstance& instance);

}  // namespace carserver::testkit
