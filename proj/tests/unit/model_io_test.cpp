#include <doctest.h>

#include <filesystem>
#include <random>

#include "hkl/error.hpp"
#include "hkl/model_io.hpp"
#include "test_support.hpp"

using namespace hkl;

TEST_CASE("model JSON round trip preserves predictions") {
  std::mt19937_64 rng(41);
  const Matrix x = testing::random_matrix(30, 3, rng);
  const Vector y = x.col(0).cwiseProduct(x.col(2)) + 0.1 * testing::random_vector(30, rng);
  for (KernelKind kind : {KernelKind::hermite, KernelKind::spline, KernelKind::gauss_hermite}) {
    FitConfig c;
    c.kernel = kind;
    c.kernel_params.q = 2;
    c.lambda = 1e-2;
    c.weights = {0.8, 3.0};
    const HklModel m = fit(x, y, c);
    const HklModel back = model_from_json(model_to_json(m));
    CHECK(back.w == m.w);
    CHECK(back.w_active == m.w_active);
    CHECK(back.weights.beta == 3.0);
    CHECK(back.gap_certified == m.gap_certified);
    const Matrix xnew = testing::random_matrix(7, 3, rng);
    CHECK((decision_function(back, xnew) - decision_function(m, xnew)).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("model files") {
  std::mt19937_64 rng(42);
  const Matrix x = testing::random_matrix(12, 2, rng);
  const Vector y = testing::random_vector(12, rng);
  const FitConfig c;
  const HklModel m = fit(x, y, c);
  const auto path = std::filesystem::temp_directory_path() / "hkl_model_io_test.json";
  save_model(m, path.string());
  const HklModel back = load_model(path.string());
  std::filesystem::remove(path);
  CHECK((predict(back, x) - predict(m, x)).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK_THROWS_AS(model_from_json("{\"format\": \"other\"}"), InvalidArgument);
  CHECK_THROWS_AS(model_from_json("not json"), InvalidArgument);
  CHECK_THROWS_AS(load_model("/nonexistent/model.json"), Error);
}
