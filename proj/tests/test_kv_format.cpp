#include <doctest.h>

#include <cmath>

#include "causelab/error.hpp"
#include "causelab/kv_format.hpp"
#include "causelab/rng.hpp"

using namespace causelab;

TEST_CASE("kv documents parse scalars, arrays and comments") {
  const auto doc = KvDocument::parse("# header\n a = 1.5 \n\nb = [1, -2.25,3]\nname = x y\n");
  CHECK(doc.get_double("a") == 1.5);
  CHECK(doc.get_doubles("b") == std::vector<double>{1, -2.25, 3});
  CHECK(doc.raw("name") == "x y");
  CHECK_FALSE(doc.has("c"));
}

TEST_CASE("kv parse errors carry the line number") {
  try {
    KvDocument::parse("a = 1\nbroken line\n", "cfg");
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.category() == ErrorCategory::parse);
    CHECK(std::string(e.what()).find("cfg:2") != std::string::npos);
  }
  CHECK_THROWS_AS(KvDocument::parse("a = 1\na = 2\n"), Error);
  CHECK_THROWS_AS(KvDocument::parse("a = one\n").get_double("a"), Error);
  CHECK_THROWS_AS(KvDocument::parse("a = 1\n").get_double("missing"), Error);
}

TEST_CASE("format_double round-trips exactly") {
  CounterRng rng(99);
  for (int i = 0; i < 2000; ++i) {
    const double v = std::ldexp(rng.uniform() - 0.5, static_cast<int>(rng.below(80)) - 40);
    CHECK(parse_double(format_double(v), "t") == v);
  }
  CHECK(format_double(0.259223510143) == "0.259223510143");
  CHECK(format_double(-0.0892939586541) == "-0.0892939586541");
}
