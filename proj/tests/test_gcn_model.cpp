#include "gradient_check.hpp"
#include "gssl/error.hpp"
#include "gssl/gcn_model.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>

using namespace gssl;
using gssl::testing::random_matrix;

namespace {

// plain triple-loop product
Matrix naive_mul(const Matrix& a, const Matrix& b) {
  Matrix out = Matrix::Zero(a.rows(), b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.cols(); ++j)
      for (Eigen::Index k = 0; k < a.cols(); ++k) out(i, j) += a(i, k) * b(k, j);
  return out;
}

Matrix naive_normalize(const Matrix& a) {
  const Eigen::Index n = a.rows();
  Matrix hat = a;
  for (Eigen::Index i = 0; i < n; ++i) hat(i, i) += 1.0;
  std::vector<double> deg(static_cast<std::size_t>(n), 0.0);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) deg[static_cast<std::size_t>(i)] += std::abs(hat(i, j));
  Matrix out(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      out(i, j) = hat(i, j) / std::sqrt(deg[static_cast<std::size_t>(i)] * deg[static_cast<std::size_t>(j)]);
  return out;
}

Matrix naive_relu(Matrix m) {
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = m.data()[i] > 0.0 ? m.data()[i] : 0.0;
  return m;
}

SignedGraph random_graph(std::size_t n, std::uint64_t seed, Eigen::Index dim) {
  SignedGraph g(random_matrix(static_cast<Eigen::Index>(n), dim, seed));
  Rng rng(seed + 1);
  std::uniform_int_distribution<std::size_t> node(0, n - 1);
  for (std::size_t e = 0; e < 2 * n; ++e) g.add_edge(node(rng), node(rng), e % 4 == 0 ? -1.0 : 1.0);
  return g;
}

GcnModel small_model(std::size_t d, std::size_t c, std::size_t hidden, TaskSet tasks, std::uint64_t seed,
                     bool bias = false) {
  ModelConfig cfg{d, c, hidden, tasks, bias};
  Rng rng(seed);
  return make_model(cfg, rng);
}

}  // namespace

TEST_CASE("adjacency normalisation by hand") {
  SUBCASE("single node") {
    const auto a = normalize_adjacency(SignedGraph(Matrix::Zero(1, 1)));
    CHECK(a.values(0, 0) == 1.0);
  }
  SUBCASE("one +1 edge") {
    SignedGraph g(Matrix::Zero(2, 1));
    g.add_edge(0, 1, 1.0);
    const Matrix v = normalize_adjacency(g).values;
    CHECK(v(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(v(0, 1) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(v(1, 1) == doctest::Approx(0.5).epsilon(1e-15));
  }
  SUBCASE("one -1 edge") {
    SignedGraph g(Matrix::Zero(2, 1));
    g.add_edge(0, 1, -1.0);
    const Matrix v = normalize_adjacency(g).values;
    CHECK(v(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(v(0, 1) == doctest::Approx(-0.5).epsilon(1e-15));
    CHECK(v(1, 0) == doctest::Approx(-0.5).epsilon(1e-15));
  }
}

TEST_CASE("normalised adjacency matches the dense formula and is symmetric") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto g = random_graph(9, seed, 1);
    const Matrix v = normalize_adjacency(g).values;
    const Matrix ref = naive_normalize(g.adjacency());
    CHECK((v - ref).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((v - v.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(v.cwiseAbs().maxCoeff() <= 1.0);
    // sum_j |A_ij| sqrt(D_jj / D_ii) == 1 for every row
    Matrix hat = g.adjacency();
    hat.diagonal().array() += 1.0;
    const Vector deg = hat.cwiseAbs().rowwise().sum();
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
      double mass = 0.0;
      for (Eigen::Index j = 0; j < v.cols(); ++j) mass += std::abs(v(i, j)) * std::sqrt(deg(j) / deg(i));
      CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("forward matches a naive matrix chain") {
  const auto g = random_graph(5, 17, 3);
  const auto model = small_model(3, 2, 7, TaskSet::all(), 4);
  const auto adj = normalize_adjacency(g);
  const Matrix a = naive_normalize(g.adjacency());
  const Matrix& x = g.node_features();
  const Matrix h1 = naive_relu(naive_mul(naive_mul(a, x), model.params[LayerId::Shared1].weight));
  const Matrix h2 = naive_relu(naive_mul(naive_mul(a, h1), model.params[LayerId::Shared2].weight));
  const std::pair<Head, LayerId> heads[] = {{Head::Classify, LayerId::Classify},
                                            {Head::Denoise, LayerId::Denoise},
                                            {Head::Completion, LayerId::Completion},
                                            {Head::Shuffle, LayerId::Shuffle}};
  for (const auto& [head, layer] : heads) {
    const Matrix expected = naive_mul(naive_mul(a, h2), model.params[layer].weight);
    const Matrix got = forward(model, adj, x, head);
    REQUIRE(got.rows() == expected.rows());
    REQUIRE(got.cols() == expected.cols());
    CHECK((got - expected).cwiseAbs().maxCoeff() < 1e-12);
  }
  CHECK(forward(model, adj, x, Head::Classify).cols() == 2);
  CHECK(forward(model, adj, x, Head::Denoise).cols() == 3);
  CHECK(forward(model, adj, x, Head::Shuffle).cols() == 1);
}

TEST_CASE("single node with identity weights passes nonnegative input through") {
  auto model = small_model(2, 2, 2, TaskSet::none(), 1);
  for (auto id : {LayerId::Shared1, LayerId::Shared2, LayerId::Classify})
    model.params[id].weight = Matrix::Identity(2, 2);
  Matrix x(1, 2);
  x << 0.3, 1.7;
  const Matrix out = forward(model, normalize_adjacency(SignedGraph(x)), x, Head::Classify);
  CHECK(out(0, 0) == 0.3);
  CHECK(out(0, 1) == 1.7);
}

TEST_CASE("zero input yields zero outputs without biases and bias rows with them") {
  const auto g = random_graph(4, 3, 3);
  const auto adj = normalize_adjacency(g);
  const Matrix zero = Matrix::Zero(4, 3);
  CHECK(forward(small_model(3, 2, 5, TaskSet::none(), 1), adj, zero, Head::Classify).isZero());

  auto biased = small_model(3, 2, 5, TaskSet::none(), 1, true);
  biased.params[LayerId::Classify].bias << 0.25, -0.5;
  const Matrix out = forward(biased, adj, zero, Head::Classify);
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    CHECK(out(r, 0) == 0.25);
    CHECK(out(r, 1) == -0.5);
  }
}

TEST_CASE("forward is permutation-equivariant") {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const auto g = random_graph(8, seed * 13, 3);
    const auto model = small_model(3, 3, 6, TaskSet::none(), seed);
    std::vector<std::size_t> perm(8);
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(seed);
    std::shuffle(perm.begin(), perm.end(), rng);

    Matrix px(8, 3);
    for (std::size_t i = 0; i < 8; ++i) px.row(static_cast<Eigen::Index>(perm[i])) = g.node_features().row(static_cast<Eigen::Index>(i));
    SignedGraph pg(px);
    for (const auto& e : g.edges()) pg.add_edge(perm[e.i], perm[e.j], e.weight);

    const Matrix out = forward(model, normalize_adjacency(g), g.node_features(), Head::Classify);
    const Matrix pout = forward(model, normalize_adjacency(pg), px, Head::Classify);
    for (std::size_t i = 0; i < 8; ++i)
      CHECK((out.row(static_cast<Eigen::Index>(i)) - pout.row(static_cast<Eigen::Index>(perm[i]))).cwiseAbs().maxCoeff() <
            1e-12);
  }
}

TEST_CASE("shape errors") {
  const auto model = small_model(3, 2, 4, TaskSet::parse("denoise"), 1);
  const auto adj = normalize_adjacency(random_graph(4, 2, 3));
  CHECK_THROWS_AS(forward(model, adj, Matrix::Zero(4, 2), Head::Classify), Error);
  CHECK_THROWS_AS(forward(model, adj, Matrix::Zero(5, 3), Head::Classify), Error);
  // shuffle head was never created
  CHECK_THROWS_AS(forward(model, adj, Matrix::Zero(4, 3), Head::Shuffle), Error);
  CHECK_NOTHROW(forward(model, adj, Matrix::Zero(4, 3), Head::Denoise));
}

TEST_CASE("model holds exactly the enabled heads") {
  const auto m = small_model(5, 3, 8, TaskSet::parse("completion,shuffle"), 2);
  CHECK(m.params[LayerId::Shared1].weight.rows() == 5);
  CHECK(m.params[LayerId::Shared2].weight.rows() == 8);
  CHECK(m.params[LayerId::Classify].weight.cols() == 3);
  CHECK_FALSE(m.params[LayerId::Denoise].present());
  CHECK(m.params[LayerId::Completion].weight.cols() == 5);
  CHECK(m.params[LayerId::Shuffle].weight.cols() == 1);
  CHECK(m.params.scalar_count() == 5 * 8 + 8 * 8 + 8 * 3 + 8 * 5 + 8);
  CHECK(m.params.all_finite());
}

TEST_CASE("task sets parse and print") {
  CHECK(TaskSet::parse("none").empty());
  CHECK(TaskSet::parse("all") == TaskSet::all());
  const auto s = TaskSet::parse("shuffle,denoise");
  CHECK(s.contains(SslTask::Denoise));
  CHECK(s.contains(SslTask::Shuffle));
  CHECK_FALSE(s.contains(SslTask::Completion));
  CHECK(s.to_string() == "denoise,shuffle");
  CHECK(TaskSet::from_mask(s.mask()) == s);
  CHECK_THROWS_AS(TaskSet::parse("rotate"), Error);
  CHECK_THROWS_AS(TaskSet::from_mask(8), Error);
}

TEST_CASE("Xavier initialisation") {
  SUBCASE("variance of a 256x256 draw") {
    Rng rng(1);
    const Matrix w = init_xavier(256, 256, rng);
    const double mean = w.mean();
    const double var = (w.array() - mean).square().sum() / static_cast<double>(w.size() - 1);
    CHECK(std::abs(var - 2.0 / 512.0) < 0.1 * 2.0 / 512.0);
    CHECK(w.cwiseAbs().maxCoeff() <= std::sqrt(6.0 / 512.0));
  }
  SUBCASE("1x1 stays within sqrt(3)") {
    for (std::uint64_t s = 0; s < 100; ++s) {
      Rng rng(s);
      const double v = init_xavier(1, 1, rng)(0, 0);
      CHECK(std::abs(v) <= std::sqrt(3.0));
    }
  }
  SUBCASE("fixed seed reproduces") {
    Rng a(5), b(5);
    CHECK(init_xavier(7, 3, a) == init_xavier(7, 3, b));
  }
  Rng rng(1);
  CHECK_THROWS_AS(init_xavier(0, 3, rng), Error);
}

TEST_CASE("analytic gradients match central differences for every loss term") {
  for (bool bias : {false, true}) {
    const auto f = gssl::testing::make_gradient_fixture(bias ? 31 : 7, bias);
    for (const std::string term : {"ce", "entropy", "denoise", "completion", "shuffle", "total"}) {
      CAPTURE(term);
      CAPTURE(bias);
      const auto grads = gssl::testing::term_gradient(f, term);
      const auto check = gssl::testing::finite_difference_check(
          f.model, [&](const GcnModel& m) { return gssl::testing::term_value(f, m, term); }, grads);
      CAPTURE(check.worst);
      CHECK(check.max_rel_error < 1e-4);
      CHECK(check.entries == f.model.params.scalar_count());
    }
  }
}

TEST_CASE("zero loss weights leave head gradients at exactly zero") {
  const auto f = gssl::testing::make_gradient_fixture(3, false);
  const auto obj = evaluate_objective(f.model, f.batch, f.instances, 0.0, 0.0);
  for (auto id : {LayerId::Denoise, LayerId::Completion, LayerId::Shuffle}) CHECK(obj.grads[id].weight.isZero());
  // and the rest equals pure cross-entropy
  const auto ce = gssl::testing::term_gradient(f, "ce");
  for (auto id : {LayerId::Shared1, LayerId::Shared2, LayerId::Classify})
    CHECK(obj.grads[id].weight == ce[id].weight);
  CHECK(obj.terms.ssl[0] > 0.0);  // still reported
}

TEST_CASE("doubling a loss weight doubles its gradient contribution") {
  const auto f = gssl::testing::make_gradient_fixture(4, false);
  const auto base = evaluate_objective(f.model, f.batch, f.instances, 0.0, 0.0).grads;
  const auto one = evaluate_objective(f.model, f.batch, f.instances, 0.0, 0.1).grads;
  const auto two = evaluate_objective(f.model, f.batch, f.instances, 0.0, 0.2).grads;
  for (std::size_t l = 0; l < kLayerCount; ++l) {
    const auto id = static_cast<LayerId>(l);
    const Matrix d1 = one[id].weight - base[id].weight;
    const Matrix d2 = two[id].weight - base[id].weight;
    CHECK((d2 - 2.0 * d1).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + d2.cwiseAbs().maxCoeff()));
  }
}
