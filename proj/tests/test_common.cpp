#include <doctest.h>

#include <cstdlib>
#include <set>

#include "core/common.hpp"

using namespace defplan;

TEST_SUITE("common") {
  TEST_CASE("feature schema") {
    CHECK(kFeatureCount == 20);
    CHECK(feature_index("wmc") == 0);
    CHECK(feature_index("loc") == 10);
    CHECK(feature_index("avg_cc") == 19);
    CHECK(feature_index("bug") == -1);
    CHECK(feature_index("") == -1);
    std::set<std::string_view> unique(kFeatureNames.begin(),
                                      kFeatureNames.end());
    CHECK(unique.size() == kFeatureNames.size());
  }

  TEST_CASE("fnv1a64 reference vectors") {
    // Published FNV-1a 64-bit test values.
    CHECK(fnv1a64("") == 14695981039346656037ull);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
    CHECK(fnv1a64("foobar") == 0x85944171f73967e8ull);
    CHECK(fnv1a64("abc") != fnv1a64("acb"));
  }

  TEST_CASE("splitmix64 reference vector") {
    // First output of the reference splitmix64 stream seeded with 0.
    CHECK(splitmix64(0) == 0xe220a8397b1dcdafull);
    CHECK(splitmix64(1) != splitmix64(2));
    CHECK(derive_stream(42, 0) != derive_stream(42, 1));
    CHECK(derive_stream(42, 0) != derive_stream(43, 0));
  }

  TEST_CASE("rng draws are deterministic and in range") {
    Rng a(987654321);
    Rng b(987654321);
    for (int i = 0; i < 1000; ++i) {
      const double u = a.uniform01();
      CHECK(u == b.uniform01());
      CHECK(u >= 0.0);
      CHECK(u < 1.0);
    }
    Rng c(5);
    Rng d(5);
    for (int i = 0; i < 1000; ++i) {
      const std::size_t v = c.uniform_below(7);
      CHECK(v == d.uniform_below(7));
      CHECK(v < 7);
    }
    CHECK_THROWS_AS(c.uniform_below(0), Error);
  }

  TEST_CASE("format_double shortest round-trip") {
    CHECK(format_double(0.0) == "0");
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(0.5) == "0.5");
    CHECK(format_double(0.25) == "0.25");
    CHECK(format_double(-3.0) == "-3");
    for (double v : {0.1, 1.0 / 3.0, 123456.789, -2.5e-7, 1e300}) {
      const std::string text = format_double(v);
      CHECK(std::strtod(text.c_str(), nullptr) == v);
    }
  }

  TEST_CASE("errors carry their code") {
    try {
      fail(ErrorCode::schema, "boom");
      CHECK(false);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::schema);
      CHECK(std::string(e.what()).find("schema") != std::string::npos);
      CHECK(std::string(e.what()).find("boom") != std::string::npos);
    }
    CHECK(error_code_name(ErrorCode::rebalance) == "rebalance");
    CHECK(error_code_name(ErrorCode::undefined_effect) == "undefined_effect");
    CHECK_NOTHROW(require(true, ErrorCode::io, "unused"));
  }
}
