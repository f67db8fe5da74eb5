#include <doctest.h>

#include <memory>
#include <random>

#include "hkl/error.hpp"
#include "hkl/kernel_source.hpp"
#include "test_support.hpp"

using namespace hkl;
using hkl::testing::random_matrix;
using hkl::testing::random_vector;
using hkl::testing::rel_max_error;

namespace {

std::shared_ptr<const KernelAtlas> make_atlas(int n, int p, int q, KernelKind kind, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  KernelParams params;
  params.q = q;
  return std::make_shared<const KernelAtlas>(random_matrix(n, p, rng), KernelFamily(kind, params, p));
}

}  // namespace

TEST_SUITE("kernel_source") {
  TEST_CASE("grid quadratic forms match explicit matrices") {
    auto atlas = make_atlas(11, 3, 2, KernelKind::hermite, 1);
    std::mt19937_64 rng(2);
    // A tiny cache budget forces evictions on every call.
    for (std::size_t cache : {std::size_t{1}, std::size_t{1} << 30}) {
      const GridKernelSource src(atlas, {1.0, 2.0}, Dag::kDefaultDenseCap, cache);
      for (int rep = 0; rep < 2; ++rep) {
        const Vector alpha = random_vector(11, rng);
        for (const Label& v : src.dag().vertices()) {
          CHECK(src.quadform(v, alpha) == doctest::Approx(alpha.dot(src.centered_gram(v) * alpha)).epsilon(1e-10));
          const Matrix s = src.sufficient_gram(v);
          CHECK(rel_max_error(s, atlas->sufficient_sum_gram(v, src.weights())) <= 1e-12);
          CHECK(src.sufficient_quadform(v, alpha) == doctest::Approx(alpha.dot(s * alpha)).epsilon(1e-10));
        }
      }
    }
  }

  TEST_CASE("quadratic forms ignore the mean of alpha") {
    auto atlas = make_atlas(8, 2, 2, KernelKind::polynomial, 3);
    const GridKernelSource src(atlas, {1.0, 2.0});
    std::mt19937_64 rng(4);
    Vector alpha = random_vector(8, rng);
    alpha.array() -= alpha.mean();
    const Vector shifted = alpha.array() + 3.0;
    for (const Label& v : src.dag().vertices())
      CHECK(src.quadform(v, shifted) == doctest::Approx(src.quadform(v, alpha)).epsilon(1e-10));
  }

  TEST_CASE("implicit grids evaluate frontier vertices") {
    auto atlas = make_atlas(9, 12, 3, KernelKind::hermite, 5);
    const GridKernelSource src(atlas, {1.0, 2.0}, 1024);
    CHECK_FALSE(src.dag().is_dense());
    std::mt19937_64 rng(6);
    const Vector alpha = random_vector(9, rng);
    Label t(12, 0);
    t[4] = 1;
    CHECK(src.sufficient_quadform(t, alpha) ==
          doctest::Approx(alpha.dot(atlas->sufficient_sum_gram(t, src.weights()) * alpha)).epsilon(1e-10));
  }

  TEST_CASE("explicit sources") {
    std::mt19937_64 rng(7);
    const Dag dag = Dag::custom(5, {{0, 1}, {0, 2}, {1, 3}, {2, 3}, {3, 4}});
    std::vector<Matrix> grams;
    for (int i = 0; i < 5; ++i) grams.push_back(testing::random_gram(6, 2, rng));
    const ExplicitKernelSource src(dag, grams, {1.0, 2.0});
    CHECK(src.n() == 6);
    for (const Label& t : dag.vertices())
      CHECK(rel_max_error(src.sufficient_gram(t), testing::brute_force_sufficient(dag, src, t)) <= 1e-12);
    CHECK_THROWS_AS(ExplicitKernelSource(dag, std::vector<Matrix>(grams.begin(), grams.end() - 1), {1.0, 2.0}),
                    InvalidArgument);
  }

  TEST_CASE("additive source sums the nonconstant blocks of each variable") {
    auto atlas = make_atlas(7, 3, 3, KernelKind::hermite, 8);
    auto src = make_additive_source(*atlas, {1.0, 2.0});
    CHECK(src->dag().num_components() == 3);
    for (int i = 0; i < 3; ++i) {
      Matrix expected = Matrix::Zero(7, 7);
      for (int j = 1; j <= 3; ++j) {
        Label v(3, 0);
        v[i] = j;
        expected += atlas->node_gram(v);
      }
      CHECK(rel_max_error(src->gram({static_cast<int>(i)}), expected) <= 1e-13);
    }
  }

  TEST_CASE("hadamard quadratic form") {
    std::mt19937_64 rng(9);
    const Matrix r = testing::random_gram(10, 3, rng);
    const Matrix f1 = testing::random_gram(10, 2, rng);
    const Matrix f2 = testing::random_gram(10, 4, rng);
    const Vector a = random_vector(10, rng);
    const Matrix full = 0.5 * r.cwiseProduct(f1).cwiseProduct(f2);
    CHECK(hadamard_quadform(a, &r, {&f1, &f2}, 0.5) == doctest::Approx(a.dot(full * a)).epsilon(1e-12));
    CHECK(hadamard_quadform(a, nullptr, {&f1}) == doctest::Approx(a.dot(f1 * a)).epsilon(1e-12));
  }
}
