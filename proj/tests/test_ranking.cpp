#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "coneroute/model.hpp"
#include "coneroute/ranking.hpp"
#include "coneroute/weights.hpp"

using namespace coneroute;

namespace {

RankOrdering ord(const std::vector<std::vector<int>>& classes, int n) {
  return RankOrdering::from_lists(classes, n);
}

bool contains(const std::vector<RankOrdering>& list, const RankOrdering& r) {
  return std::find(list.begin(), list.end(), r) != list.end();
}

NetworkModel diamond() {
  return NetworkModel::from_link_probabilities(
      3, {{1, 0, 0.5}, {3, 0, 0.5}, {2, 1, 0.5}, {2, 3, 0.5}});
}

}  // namespace

TEST_CASE("construction enforces the partition invariants") {
  CHECK_NOTHROW(ord({{1}, {2}}, 2));
  CHECK_THROWS_WITH_AS(ord({{1}, {1, 2}}, 2), doctest::Contains("NotAPartition"), Error);
  CHECK_THROWS_WITH_AS(ord({{1, 2}}, 3), doctest::Contains("NotAPartition"), Error);
  CHECK_THROWS_WITH_AS(RankOrdering({node_bit(1), 0}, 2), doctest::Contains("EmptyClass"), Error);
  CHECK(ordering_to_string(ord({{2}, {1, 3}}, 3)) == "[[2],[1,3]]");
  CHECK(RankOrdering::whole(3) == ord({{1, 2, 3}}, 3));
}

TEST_CASE("mismatch finds the first differing class") {
  CHECK(mismatch(ord({{1}, {2}, {3}}, 3), ord({{1}, {2, 3}}, 3)) == 2);
  CHECK(mismatch(ord({{1, 2}, {3}}, 3), ord({{1}, {2}, {3}}, 3)) == 1);
  CHECK(mismatch(ord({{1}, {2, 3}}, 3), ord({{1}, {2}, {3}}, 3)) == 2);
  CHECK_THROWS_WITH_AS(mismatch(ord({{2}, {1}, {3}}, 3), ord({{2}, {1}, {3}}, 3)),
                       doctest::Contains("IdenticalOrderings"), Error);
}

TEST_CASE("refinement preserves every strict rank relation") {
  CHECK(is_refinement(ord({{1}, {2}, {3}}, 3), ord({{1}, {2, 3}}, 3)));
  CHECK(!is_refinement(ord({{2}, {1}, {3}}, 3), ord({{1}, {2, 3}}, 3)));
  RankOrdering r = ord({{2}, {1, 3}}, 3);
  CHECK(is_refinement(r, r));  // reflexive
  CHECK(!is_refinement(ord({{1, 2, 3}}, 3), ord({{1}, {2, 3}}, 3)));
}

TEST_CASE("one-step refinements split a single class in order") {
  std::vector<RankOrdering> splits = one_step_refinements(ord({{1, 2}}, 2));
  REQUIRE(splits.size() == 2);
  CHECK(contains(splits, ord({{1}, {2}}, 2)));
  CHECK(contains(splits, ord({{2}, {1}}, 2)));

  CHECK(one_step_refinements(ord({{1}, {2}}, 2)).empty());
  CHECK(one_step_refinements(RankOrdering::whole(3)).size() == 6);  // 2^3 - 2

  for (const RankOrdering& s : one_step_refinements(ord({{1, 2}, {3, 4}}, 4))) {
    CHECK(s.num_classes() == 3);
    CHECK(is_refinement(s, ord({{1, 2}, {3, 4}}, 4)));
    CHECK(is_one_step_refinement(s, ord({{1, 2}, {3, 4}}, 4)));
  }
}

TEST_CASE("one-step confinements merge adjacent classes") {
  std::vector<RankOrdering> merges = one_step_confinements(ord({{1}, {2}}, 2));
  REQUIRE(merges.size() == 1);
  CHECK(merges[0] == ord({{1, 2}}, 2));

  CHECK(one_step_confinements(RankOrdering::whole(3)).empty());

  merges = one_step_confinements(ord({{1}, {2}, {3}}, 3));
  REQUIRE(merges.size() == 2);
  CHECK(contains(merges, ord({{1, 2}, {3}}, 3)));
  CHECK(contains(merges, ord({{1}, {2, 3}}, 3)));
}

TEST_CASE("adjacency is the union of splits and merges, and is symmetric") {
  std::vector<RankOrdering> a = adjacency(ord({{1, 2}}, 2));
  REQUIRE(a.size() == 2);
  CHECK(contains(a, ord({{1}, {2}}, 2)));
  CHECK(contains(a, ord({{2}, {1}}, 2)));

  a = adjacency(ord({{1}, {2}}, 2));
  REQUIRE(a.size() == 1);
  CHECK(a[0] == ord({{1, 2}}, 2));

  CHECK(adjacency(ord({{1}, {2}, {3}}, 3)).size() == 2);

  RankOrdering r = ord({{1, 3}, {2}}, 3);
  for (const RankOrdering& n : adjacency(r)) CHECK(contains(adjacency(n), r));
}

TEST_CASE("path-connectivity on the diamond network") {
  NetworkModel m = diamond();
  CHECK(!is_path_connected(ord({{2}, {1}, {3}}, 3), m));
  CHECK(!is_path_connected(ord({{2}, {3}, {1}}, 3), m));
  CHECK(!is_path_connected(ord({{2}, {1, 3}}, 3), m));
  CHECK(is_path_connected(RankOrdering::whole(3), m));
  CHECK(is_path_connected(ord({{1}, {2}, {3}}, 3), m));
  CHECK(is_path_connected(ord({{1, 3}, {2}}, 3), m));
}

TEST_CASE("path-connected adjacency filters splits but keeps merges") {
  NetworkModel m = diamond();
  std::vector<RankOrdering> a = path_connected_adjacency(RankOrdering::whole(3), m);
  CHECK(!contains(a, ord({{2}, {1, 3}}, 3)));
  CHECK(contains(a, ord({{1, 3}, {2}}, 3)));

  NetworkModel chain = NetworkModel::from_link_probabilities(2, {{1, 0, 0.5}, {2, 1, 0.5}});
  a = path_connected_adjacency(RankOrdering::whole(2), chain);
  REQUIRE(a.size() == 1);
  CHECK(a[0] == ord({{1}, {2}}, 2));

  // Merging classes only relaxes the allowed-hop constraint.
  RankOrdering fine = ord({{1}, {3}, {2}}, 3);
  REQUIRE(is_path_connected(fine, m));
  std::vector<RankOrdering> pc = path_connected_adjacency(fine, m);
  for (const RankOrdering& c : one_step_confinements(fine)) CHECK(contains(pc, c));

  CHECK_THROWS_WITH_AS(path_connected_adjacency(ord({{2}, {1, 3}}, 3), m),
                       doctest::Contains("NotPathConnected"), Error);
}

TEST_CASE("penalty evaluates the prefix-weighted backlog sum") {
  WeightFunction f = WeightFunction::geometric(3.0);
  std::vector<double> q{1.0, 3.0};
  CHECK(penalty(q, ord({{1}, {2}}, 2), 2, f) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(penalty(q, ord({{1}, {2}}, 2), 1, f) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(penalty(q, ord({{1, 2}}, 2), 1, f) == doctest::Approx(0.5).epsilon(1e-12));
  std::vector<double> zero{0.0, 0.0};
  CHECK(penalty(zero, ord({{2}, {1}}, 2), 2, f) == 0.0);
  CHECK_THROWS_WITH_AS(penalty(q, ord({{1}, {2}}, 2), 3, f),
                       doctest::Contains("BadPrefixLength"), Error);

  // Positive homogeneity.
  std::vector<double> q3{0.7, 2.2, 1.4};
  RankOrdering r = ord({{3}, {1, 2}}, 3);
  for (double eta : {0.5, 2.0, 10.0}) {
    std::vector<double> scaled{eta * q3[0], eta * q3[1], eta * q3[2]};
    CHECK(penalty(scaled, r, 2, f) == doctest::Approx(eta * penalty(q3, r, 2, f)).epsilon(1e-12));
  }
}

TEST_CASE("less_penalizes compares at the mismatch and breaks ties toward refinement") {
  WeightFunction f = WeightFunction::geometric(3.0);
  std::vector<double> q13{1.0, 3.0};
  CHECK(less_penalizes(ord({{1}, {2}}, 2), ord({{1, 2}}, 2), q13, f));

  std::vector<double> q11{1.0, 1.0};
  CHECK(less_penalizes(ord({{1, 2}}, 2), ord({{1}, {2}}, 2), q11, f));
  CHECK(!less_penalizes(ord({{1}, {2}}, 2), ord({{1, 2}}, 2), q11, f));

  PenaltyOrder po = compare_penalty(ord({{1}, {2}}, 2), ord({{1, 2}}, 2), q13, f);
  CHECK(po.tie);
  CHECK(po.less);

  CHECK_THROWS_WITH_AS(less_penalizes(ord({{1}, {2}}, 2), ord({{1}, {2}}, 2), q13, f),
                       doctest::Contains("IdenticalOrderings"), Error);
}
