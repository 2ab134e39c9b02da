#include "gssl/dataset.hpp"
#include "gssl/error.hpp"
#include "gssl/graph.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace gssl;
using gssl::testing::make_dataset;

namespace {

ErrorKind kind_of(const FeatureDataset& raw, std::optional<std::size_t>* where = nullptr) {
  try {
    validate_dataset(raw);
  } catch (const Error& e) {
    if (where) *where = e.where();
    return e.kind();
  }
  FAIL("dataset was accepted");
  return ErrorKind::Io;
}

FeatureDataset raw_dataset(Eigen::Index n, Eigen::Index d, int classes) {
  FeatureDataset ds;
  ds.features = Matrix::Zero(n, d);
  ds.labels.assign(static_cast<std::size_t>(n), std::nullopt);
  ds.ids = gssl::testing::row_ids(static_cast<std::size_t>(n));
  ds.class_count = classes;
  return ds;
}

}  // namespace

TEST_CASE("minimal valid dataset is accepted") {
  auto ds = make_dataset(Matrix::Ones(3, 2), {0, 1, std::nullopt}, 2);
  CHECK(ds.labeled_count() == 2);
  CHECK(ds.unlabeled_count() == 1);
  CHECK(ds.labeled_indices() == std::vector<std::size_t>{0, 1});
  CHECK(ds.unlabeled_indices() == std::vector<std::size_t>{2});
}

TEST_CASE("validation errors name the offending row") {
  std::optional<std::size_t> where;

  auto out_of_range = raw_dataset(4, 2, 4);
  out_of_range.labels[2] = 5;
  CHECK(kind_of(out_of_range, &where) == ErrorKind::LabelOutOfRange);
  CHECK(where == 2);

  auto nan = raw_dataset(10, 3, 2);
  nan.features(7, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK(kind_of(nan, &where) == ErrorKind::NonFiniteFeature);
  CHECK(where == 7);

  auto inf = raw_dataset(3, 1, 2);
  inf.features(0, 0) = std::numeric_limits<double>::infinity();
  CHECK(kind_of(inf) == ErrorKind::NonFiniteFeature);

  auto dup = raw_dataset(3, 1, 2);
  dup.ids[2] = dup.ids[0];
  CHECK(kind_of(dup, &where) == ErrorKind::DuplicateId);
  CHECK(where == 2);

  CHECK(kind_of(raw_dataset(0, 2, 2)) == ErrorKind::EmptyDataset);
  CHECK(kind_of(raw_dataset(2, 0, 2)) == ErrorKind::EmptyDataset);

  auto negative = raw_dataset(2, 1, 2);
  negative.labels[1] = -1;
  CHECK(kind_of(negative) == ErrorKind::LabelOutOfRange);

  auto one_class = raw_dataset(2, 1, 1);
  one_class.labels[0] = 0;
  CHECK(kind_of(one_class) == ErrorKind::InvalidClassCount);
}

TEST_CASE("unlabeled dataset may omit a class count") {
  auto ds = raw_dataset(2, 2, 0);
  CHECK_NOTHROW(validate_dataset(ds));
}

TEST_CASE("labeled and unlabeled indices partition the rows") {
  auto ds = make_dataset(gssl::testing::random_matrix(9, 2, 3), {0, std::nullopt, 1, 1, std::nullopt, 0, 2,
                                                                 std::nullopt, 2},
                         3);
  auto all = ds.labeled_indices();
  const auto un = ds.unlabeled_indices();
  all.insert(all.end(), un.begin(), un.end());
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < all.size(); ++i) CHECK(all[i] == i);
  const auto groups = ds.indices_by_class();
  CHECK(groups[0] == std::vector<std::size_t>{0, 5});
  CHECK(groups[2] == std::vector<std::size_t>{6, 8});
}

TEST_CASE("select_rows carries labels and ids") {
  auto ds = make_dataset(gssl::testing::line_points({0, 1, 2, 3}), {0, std::nullopt, 1, 1}, 2);
  const auto sub = select_rows(ds, {3, 1});
  CHECK(sub.size() == 2);
  CHECK(sub.features(0, 0) == 3.0);
  CHECK(sub.ids[1] == "n1");
  CHECK(!sub.labels[1].has_value());
  CHECK(sub.class_count == 2);
}

TEST_CASE("signed graph stores each undirected edge once") {
  SignedGraph g(Matrix::Zero(4, 2));
  CHECK(g.add_edge(0, 1, 1.0));
  CHECK_FALSE(g.add_edge(1, 0, -1.0));  // first weight wins
  CHECK_FALSE(g.add_edge(2, 2, 1.0));   // no self-loops
  CHECK(g.add_edge(3, 1, -1.0));
  CHECK(g.edges().size() == 2);
  CHECK(g.has_edge(1, 0));
  CHECK_FALSE(g.has_edge(2, 2));
  CHECK(g.degree(1) == 2);

  const Matrix a = g.adjacency();
  CHECK(a == a.transpose());
  CHECK(a(0, 1) == 1.0);
  CHECK(a(1, 3) == -1.0);
  CHECK(a.diagonal().isZero());

  CHECK_THROWS_AS(g.add_edge(0, 4, 1.0), Error);
  CHECK_THROWS_AS(g.add_edge(0, 2, 0.5), Error);
}

TEST_CASE("random edge sets give symmetric {-1,0,1} adjacency") {
  Rng rng(11);
  std::uniform_int_distribution<std::size_t> node(0, 11);
  for (int trial = 0; trial < 20; ++trial) {
    SignedGraph g(Matrix::Zero(12, 1));
    for (int e = 0; e < 30; ++e) g.add_edge(node(rng), node(rng), (e % 3 == 0) ? -1.0 : 1.0);
    const Matrix a = g.adjacency();
    CHECK(a == a.transpose());
    CHECK(((a.array() == 0.0) || (a.array() == 1.0) || (a.array() == -1.0)).all());
    CHECK(static_cast<std::size_t>((a.array() != 0.0).count()) == 2 * g.edges().size());
  }
}

TEST_CASE("class balance counts only true labels") {
  SubgraphBatch b;
  b.graph = SignedGraph(Matrix::Zero(5, 1));
  b.labels = {0, 1, 0, 1, 0};
  b.provenance = {Provenance::TrueLabel, Provenance::TrueLabel, Provenance::TrueLabel, Provenance::TrueLabel,
                  Provenance::PseudoLabel};
  CHECK(is_class_balanced(b, 2));
  b.provenance[4] = Provenance::TrueLabel;
  CHECK_FALSE(is_class_balanced(b, 2));
  CHECK(b.nodes_with(Provenance::TrueLabel).size() == 5);
}

TEST_CASE("pseudolabel store coverage") {
  PseudolabelStore s;
  s.by_index = {std::nullopt, Pseudolabel{1, 0.9}, Pseudolabel{0, 0.6}};
  CHECK(s.size() == 2);
  CHECK(s.covers({1, 2}));
  CHECK_FALSE(s.covers({0, 1}));
}

TEST_CASE("error message carries kind and location") {
  const Error e(ErrorKind::RaggedRow, "wrong field count", 12);
  CHECK(std::string(e.what()).find("RaggedRow") != std::string::npos);
  CHECK(std::string(e.what()).find("12") != std::string::npos);
  CHECK(e.where() == 12);
}
