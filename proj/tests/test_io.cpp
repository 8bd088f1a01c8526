#include <gtest/gtest.h>

#include "essnorm/io.hpp"

using namespace essnorm;
using io::json;

namespace {

std::string pointer_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const io::InputError& e) {
    return e.pointer();
  }
  return "<no error>";
}

}  // namespace

TEST(Io, WeightSpecRoundTrip) {
  for (const char* text : {R"({"m": 3, "family": "drury_arveson"})",
                           R"({"m": 2, "family": "custom", "table": [{"alpha": [0, 0], "lambda": 1.0}, {"alpha": [1, 0], "lambda": 0.5}], "extend": "product_extend"})"}) {
    const auto w = io::parse_weights(json::parse(text));
    const auto again = io::parse_weights(io::to_json(w));
    EXPECT_EQ(io::to_json(w), io::to_json(again));
  }
  const auto c = io::parse_weights(json::parse(R"({"m": 2, "family": "custom", "table": [{"alpha": [0, 0], "lambda": 1.0}, {"alpha": [1, 0], "lambda": 0.5}]})"));
  EXPECT_DOUBLE_EQ(c.build().ratio(0, {0, 0}), 0.5);
}

TEST(Io, SubmoduleSpecRoundTrip) {
  const auto set = io::parse_submodule(json::parse(R"({"m": 2, "generators": [[2, 0], [0, 3]]})"));
  EXPECT_TRUE(set.scalar);
  EXPECT_EQ(io::to_json(set), json::parse(R"({"m": 2, "generators": [[2, 0], [0, 3]]})"));
  const auto vec = io::parse_submodule(json::parse(R"({"m": 2, "k": 2, "generators": [{"alpha": [0, 2], "x": [1, 0]}, {"alpha": [0, 0], "x": [0, [0.5, -1]]}]})"));
  EXPECT_FALSE(vec.scalar);
  EXPECT_EQ(vec.generators[1].x[1], Complex(0.5, -1.0));
  EXPECT_EQ(io::to_json(io::parse_submodule(io::to_json(vec))), io::to_json(vec));
  EXPECT_EQ(vec.build().fiber_dim({0, 2}), 2u);
}

TEST(Io, ErrorsCarryPointers) {
  EXPECT_EQ(pointer_of([] { io::parse_weights(json::parse(R"({"family": "drury_arveson"})")); }), "/m");
  EXPECT_EQ(pointer_of([] { io::parse_weights(json::parse(R"({"m": 2, "family": "nope"})")); }), "/family");
  EXPECT_EQ(pointer_of([] { io::parse_weights(json::parse(R"({"m": 2, "family": "custom", "table": [{"alpha": [0, 0], "lambda": -1}]})")); }),
            "/table/0/lambda");
  EXPECT_EQ(pointer_of([] { io::parse_submodule(json::parse(R"({"m": 2, "generators": [[1, 2], [3]]})")); }), "/generators/1");
  EXPECT_EQ(pointer_of([] { io::parse_submodule(json::parse(R"({"m": 2, "generators": [[1, -2]]})")); }), "/generators/0/1");
  EXPECT_EQ(pointer_of([] { io::parse_submodule(json::parse(R"({"m": 2, "k": 2, "generators": [{"alpha": [0, 0], "x": [0, 0]}]})")); }),
            "/generators/0/x");
  EXPECT_EQ(pointer_of([] { io::parse_run_config(json::parse(R"({"command": "schatten", "seed": -4})")); }), "/seed");
  EXPECT_THROW(io::parse_text("{\"m\": ", "input"), io::InputError);
}

TEST(Io, RunConfigRoundTrip) {
  io::RunConfig c;
  c.command = "report";
  c.weights = io::parse_weights(json::parse(R"({"m": 2, "family": "drury_arveson"})"));
  c.submodule = io::parse_submodule(json::parse(R"({"m": 2, "generators": [[2, 3]]})"));
  c.params = {{"p", {2.5, 3.0}}, {"max_degree", 400}};
  c.seed = 7;
  const json j = io::to_json(c);
  EXPECT_EQ(io::to_json(io::parse_run_config(j)), j);
  EXPECT_EQ(j["weights"]["family"], "drury_arveson");
}
