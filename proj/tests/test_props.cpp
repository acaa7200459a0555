#include <doctest.h>

#include <set>
#include <string>

#include "loco/props.hpp"

namespace props = loco::props;

TEST_CASE("every invariant holds on 1000 trials") {
  props::Options o;
  o.seed = 2024;
  o.trials = 1000;
  const auto results = props::run_all(o);
  std::set<std::string> names;
  for (const auto& r : results) {
    CAPTURE(r.name);
    CAPTURE(r.worst);
    CAPTURE(r.seed);
    CHECK(r.passed);
    CHECK(r.slack() >= 0.0);
    names.insert(r.name);
  }
  CHECK(names.size() == results.size());
  for (const char* n : {"oracle-equivalence", "normalization", "truncation-consistency",
                        "decreasing-maximum", "bound-validity", "gradient-oracle",
                        "hilbert-bijection", "hilbert-adjacency", "init-omega"}) {
    CHECK(names.count(n) == 1);
  }
}

TEST_CASE("a sign flip in the recursion is caught by oracle equivalence") {
  props::Options o;
  o.trials = 50;
  o.pmf = props::faulty_pmf_sign_flip;
  bool flagged = false;
  for (const auto& r : props::run_all(o)) {
    if (r.name == "oracle-equivalence") flagged = !r.passed;
  }
  CHECK(flagged);
}

TEST_CASE("results depend only on the seed") {
  props::Options o;
  o.trials = 30;
  o.seed = 5;
  const auto a = props::run_all(o), b = props::run_all(o);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].worst == b[i].worst);
    CHECK(a[i].seed == b[i].seed);
  }
}
