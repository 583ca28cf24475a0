#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "coneroute/model.hpp"

using namespace coneroute;

namespace {

NetworkModel symmetric_single_relay(double p = 0.5) {
  return NetworkModel(1, {{}, {{node_bit(0) | node_bit(1), p}, {node_bit(1), 1.0 - p}}});
}

}  // namespace

TEST_CASE("construction validates and normalizes") {
  CHECK_NOTHROW(symmetric_single_relay());

  // Distribution sums to 1.2.
  CHECK_THROWS_WITH_AS(
      NetworkModel(1, {{}, {{node_bit(0) | node_bit(1), 0.6}, {node_bit(1), 0.6}}}),
      doctest::Contains("ProbSumError"), Error);

  // Transmitter missing from its own support set.
  CHECK_THROWS_WITH_AS(NetworkModel(1, {{}, {{node_bit(0), 1.0}}}),
                       doctest::Contains("SelfNotInSet"), Error);

  // Subset mentions a node beyond N.
  CHECK_THROWS_WITH_AS(NetworkModel(1, {{}, {{node_bit(1) | node_bit(5), 1.0}}}),
                       doctest::Contains("BadSubset"), Error);

  // Node 0 never transmits.
  CHECK_THROWS_AS(NetworkModel(1, {{{node_bit(0), 1.0}}, {{node_bit(1), 1.0}}}), Error);

  // Empty broadcast list.
  CHECK_THROWS_WITH_AS(NetworkModel(1, {{}, {}}), doctest::Contains("NoPositiveEntry"), Error);

  // Duplicate subsets merge; zero-probability entries drop.
  NetworkModel merged(1, {{},
                          {{node_bit(0) | node_bit(1), 0.25},
                           {node_bit(0) | node_bit(1), 0.25},
                           {node_bit(1), 0.5},
                           {node_bit(1) | node_bit(0), 0.0}}});
  CHECK(merged.broadcast(1).size() == 2);
  double sum = 0.0;
  for (const BroadcastEntry& e : merged.broadcast(1)) sum += e.prob;
  CHECK(sum == 1.0);
}

TEST_CASE("reaches is one-hop support membership") {
  NetworkModel chain = NetworkModel::from_link_probabilities(2, {{1, 0, 0.5}, {2, 1, 0.5}});
  CHECK(chain.reaches(2, 1));
  CHECK(!chain.reaches(2, 0));
  CHECK(chain.reaches(1, 0));
  for (int i = 1; i <= 2; ++i) CHECK(!chain.reaches(i, i));
  CHECK(chain.reach_set(2) == node_bit(1));
  CHECK(chain.reach_set(1) == node_bit(0));
}

TEST_CASE("is_connected follows directed reach paths") {
  NetworkModel chain = NetworkModel::from_link_probabilities(2, {{1, 0, 0.5}, {2, 1, 0.5}});
  CHECK(chain.is_connected());

  // Relay 2 only ever keeps its own packet: isolated.
  NetworkModel isolated(2, {{},
                            {{node_bit(0) | node_bit(1), 0.5}, {node_bit(1), 0.5}},
                            {{node_bit(2), 1.0}}});
  CHECK(!isolated.is_connected());

  // Diamond: 2 reaches 0 only through 1 or 3.
  NetworkModel diamond = NetworkModel::from_link_probabilities(
      3, {{1, 0, 0.5}, {3, 0, 0.5}, {2, 1, 0.5}, {2, 3, 0.5}});
  CHECK(diamond.is_connected());
  CHECK(!diamond.reaches(2, 0));
}

TEST_CASE("p_min picks the smallest positive entry") {
  NetworkModel m(1, {{}, {{node_bit(0) | node_bit(1), 0.7}, {node_bit(1), 0.3}}});
  CHECK(m.p_min() == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(symmetric_single_relay().p_min() == doctest::Approx(0.5).epsilon(1e-12));

  NetworkModel two(2, {{},
                       {{node_bit(0) | node_bit(1), 0.5}, {node_bit(1), 0.5}},
                       {{node_bit(1) | node_bit(2), 0.9}, {node_bit(2), 0.1}}});
  CHECK(two.p_min() == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("product-form constructor expands link outcomes") {
  NetworkModel certain = NetworkModel::from_link_probabilities(1, {{1, 0, 1.0}});
  REQUIRE(certain.broadcast(1).size() == 1);
  CHECK(certain.broadcast(1)[0].set == (node_bit(0) | node_bit(1)));
  CHECK(certain.broadcast(1)[0].prob == 1.0);

  NetworkModel half = NetworkModel::from_link_probabilities(1, {{1, 0, 0.5}});
  REQUIRE(half.broadcast(1).size() == 2);

  NetworkModel fork = NetworkModel::from_link_probabilities(3, {{2, 1, 0.5}, {2, 3, 0.5}});
  REQUIRE(fork.broadcast(2).size() == 4);
  for (const BroadcastEntry& e : fork.broadcast(2)) {
    CHECK(e.prob == doctest::Approx(0.25).epsilon(1e-12));
    CHECK((e.set & node_bit(2)) != 0);
  }

  std::vector<LinkProb> wide;
  for (int j = 1; j <= 21; ++j) wide.push_back({22, j, 0.5});
  CHECK_THROWS_WITH_AS(NetworkModel::from_link_probabilities(22, wide),
                       doctest::Contains("DegreeTooLarge"), Error);
}

TEST_CASE("sampling is deterministic and matches declared probabilities") {
  NetworkModel m = symmetric_single_relay();

  Rng a(7), b(7);
  for (int t = 0; t < 64; ++t) {
    Rng sa = a.derive({1, 1, static_cast<std::uint64_t>(t)});
    Rng sb = b.derive({1, 1, static_cast<std::uint64_t>(t)});
    CHECK(m.sample_forwarder_set(1, sa) == m.sample_forwarder_set(1, sb));
  }

  NetworkModel point = NetworkModel::from_link_probabilities(1, {{1, 0, 1.0}});
  Rng r(3);
  for (int t = 0; t < 16; ++t)
    CHECK(point.sample_forwarder_set(1, r) == (node_bit(0) | node_bit(1)));

  // Empirical frequency of the delivery outcome.
  Rng mc(11);
  int hits = 0;
  const int draws = 100000;
  for (int t = 0; t < draws; ++t) {
    NodeMask s = m.sample_forwarder_set(1, mc);
    CHECK((s == (node_bit(0) | node_bit(1)) || s == node_bit(1)));
    if (s & node_bit(0)) ++hits;
  }
  CHECK(std::fabs(hits / static_cast<double>(draws) - 0.5) < 0.01);
}
