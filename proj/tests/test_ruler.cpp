#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

#include "mwalk/objfun.hpp"
#include "mwalk/rng.hpp"
#include "mwalk/ruler.hpp"

using namespace mwalk;

namespace {

const std::vector<double> kGolomb{1, 2, 4, 10, 12, 17};

RulerState golomb(const ObjectiveSpec& spec) {
  EvalCounter c;
  return make_ruler_state(spec, kGolomb, c);
}

NeighborhoodOptions full(std::size_t m, double dither = 0.0) {
  NeighborhoodOptions opt;
  opt.radius = m - 2;
  opt.dither = dither;
  return opt;
}

}  // namespace

TEST(Init, AnchorsAndDeterminism) {
  const auto spec = make_objective("ehrenfest4");
  for (std::uint64_t seed : {1u, 7u, 99u}) {
    Rng a(seed), b(seed);
    EvalCounter ca, cb;
    const auto sa = init_rulers(spec, 6, a, ca);
    const auto sb = init_rulers(spec, 6, b, cb);
    EXPECT_EQ(sa.at(0, 0), 1.0);
    EXPECT_EQ(sa.at(5, 0), 17.0);
    EXPECT_EQ(sa.coords, sb.coords);
    EXPECT_EQ(sa.values, sb.values);
    EXPECT_EQ(ca.probes, 6u);
  }
}

TEST(Init, WithinBoxAndConsistent) {
  auto spec = make_objective("trefethen3");
  Rng rng(3);
  EvalCounter c;
  const auto s = init_rulers(spec, 32, rng, c);
  for (std::size_t i = 0; i < s.marks; ++i) {
    for (std::size_t k = 0; k < 3; ++k) {
      EXPECT_GE(s.at(i, k), -1.0);
      EXPECT_LE(s.at(i, k), 1.0);
    }
    EXPECT_EQ(s.values[i], spec.fn(s.row(i)));
  }
}

TEST(Init, NarrowBox) {
  auto spec = make_objective("wild1");
  spec.upper = {spec.lower[0] + 1e-9};
  Rng rng(5);
  EvalCounter c;
  const auto s = init_rulers(spec, 8, rng, c);
  for (double x : s.coords) {
    EXPECT_GE(x, spec.lower[0]);
    EXPECT_LE(x, spec.upper[0]);
  }
}

TEST(Init, RejectsFewMarks) {
  const auto spec = make_objective("wild1");
  Rng rng(1);
  EvalCounter c;
  EXPECT_THROW(init_rulers(spec, 3, rng, c), config_error);
}

TEST(Candidate, FigureEntries) {
  const auto spec = make_objective("ehrenfest4");
  const auto s = golomb(spec);
  Rng rng(1);
  // marks 10 and 12
  EXPECT_EQ(candidate_coords(s, spec, 3, 4, 0.0, rng)[0], 3.0);
  // mark at the upper bound against mark 2 mirrors it
  EXPECT_EQ(candidate_coords(s, spec, 5, 1, 0.0, rng)[0], 16.0);
  // mark at the lower bound reproduces the neighbor's position
  for (std::size_t j = 1; j < 6; ++j)
    EXPECT_EQ(candidate_coords(s, spec, 0, j, 0.0, rng)[0], kGolomb[j]);
}

TEST(Candidate, DitherZeroDrawsNothing) {
  const auto spec = make_objective("ehrenfest4");
  const auto s = golomb(spec);
  Rng a(42), b(42);
  candidate_coords(s, spec, 2, 4, 0.0, a);
  EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(Candidate, ClampedForAnyDither) {
  const auto spec = make_objective("ehrenfest4");
  const auto s = golomb(spec);
  Rng rng(8);
  for (double dither : {0.0, 0.01, 0.5, 1.0})
    for (int rep = 0; rep < 200; ++rep)
      for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < 6; ++j) {
          if (i == j) continue;
          const double c = candidate_coords(s, spec, i, j, dither, rng)[0];
          ASSERT_GE(c, 1.0);
          ASSERT_LE(c, 17.0);
        }
}

TEST(Neighbors, Eligible) {
  EXPECT_EQ(eligible_neighbors(0, 6), (std::vector<std::size_t>{1, 2, 3, 4}));
  EXPECT_EQ(eligible_neighbors(3, 6), (std::vector<std::size_t>{1, 2, 4, 5}));
  EXPECT_EQ(eligible_neighbors(1, 4), (std::vector<std::size_t>{2, 3}));
  for (std::size_t m = 4; m < 40; ++m)
    for (std::size_t i = 0; i < m; ++i) {
      const auto n = eligible_neighbors(i, m);
      ASSERT_EQ(n.size(), m - 2);
      ASSERT_EQ(std::count(n.begin(), n.end(), i), 0);
    }
}

TEST(Neighbors, PinnedAnchorNoOp) {
  const auto spec = make_objective("wild2");
  Rng rng(4);
  EvalCounter c;
  const auto s = init_rulers(spec, 10, rng, c);
  Rng unused;
  for (std::size_t i = 1; i < s.marks; ++i) {
    const auto x = candidate_coords(s, spec, i, 0, 0.0, unused);
    for (std::size_t k = 0; k < 2; ++k) EXPECT_EQ(x[k], s.at(i, k));
  }
  const auto top = candidate_coords(s, spec, 0, s.marks - 1, 0.0, unused);
  EXPECT_EQ(top, spec.upper);
}

TEST(Tables, FigureTwo) {
  const auto spec = make_objective("ehrenfest4");
  const auto s = golomb(spec);
  const Table neighborhood = {{2, 4, 10, 12},  {3, 9, 11, 16}, {3, 7, 9, 14},
                              {9, 7, 3, 8},    {11, 9, 3, 6},  {16, 14, 8, 6}};
  EXPECT_EQ(neighborhood_table(s, spec), neighborhood);

  const auto diff = difference_table(s, spec);
  EXPECT_TRUE(std::isnan(diff[2][2]));
  EXPECT_EQ(diff[0][5], 17.0);
  EXPECT_EQ(diff[1][0], 2.0);
  EXPECT_EQ(diff[4][3], 3.0);
  const auto text = format_neighborhood(s, spec);
  EXPECT_NE(text.find("ruler = (1, 2, 4, 10, 12, 17)"), std::string::npos);
  EXPECT_NE(text.find("6 16 14 8 6"), std::string::npos);
}

TEST(Eval, FindsMinimumInOneStep) {
  const auto spec = make_objective("ehrenfest4");
  const auto s = golomb(spec);
  Rng rng(1);
  EvalCounter c;
  const auto prop = neighborhood_eval(s, spec, full(6), rng, c);
  EXPECT_EQ(c.probes, 24u);
  EXPECT_EQ(prop.row(2)[0], 9.0);
  EXPECT_EQ(prop.chosen[2], 4u);
  EXPECT_EQ(prop.values[2], ehrenfest_surrogate(9.0, 4));
}

TEST(Eval, FullRadiusIndependentOfRng) {
  const auto spec = make_objective("wild3");
  Rng init(21);
  EvalCounter c;
  const auto s = init_rulers(spec, 12, init, c);
  for (auto move : {RulerMove::single, RulerMove::all}) {
    auto opt = full(12);
    opt.move = move;
    opt.phase = 5;
    Rng a(1), b(999);
    const auto pa = neighborhood_eval(s, spec, opt, a, c);
    const auto pb = neighborhood_eval(s, spec, opt, b, c);
    EXPECT_EQ(pa.coords, pb.coords);
    EXPECT_EQ(pa.values, pb.values);
  }
}

TEST(Eval, ProbesAndBestPerMark) {
  const auto spec = make_objective("trefethen2");
  Rng rng(17);
  EvalCounter c;
  const auto s = init_rulers(spec, 16, rng, c);
  for (std::size_t r : {1u, 2u, 7u, 14u}) {
    for (auto move : {RulerMove::single, RulerMove::all}) {
      NeighborhoodOptions opt;
      opt.radius = r;
      opt.dither = 0.01;
      opt.move = move;
      const auto before = c.probes;
      const auto prop = neighborhood_eval(s, spec, opt, rng, c);
      EXPECT_EQ(c.probes - before, 16u * r);
      for (std::size_t i = 0; i < 16; ++i) {
        const auto& nb = prop.neighbors[i];
        ASSERT_EQ(nb.size(), r);
        EXPECT_TRUE(std::is_sorted(nb.begin(), nb.end()));
        EXPECT_EQ(std::set<std::size_t>(nb.begin(), nb.end()).size(), r);
        const auto pool = eligible_neighbors(i, 16);
        for (auto j : nb) EXPECT_NE(std::find(pool.begin(), pool.end(), j), pool.end());
        EXPECT_EQ(prop.values[i], spec.fn(prop.row(i)));
        for (std::size_t k = 0; k < 2; ++k) {
          EXPECT_GE(prop.row(i)[k], -1.0);
          EXPECT_LE(prop.row(i)[k], 1.0);
        }
      }
    }
  }
}

TEST(Eval, SingleMoveChangesOneRuler) {
  const auto spec = make_objective("wild3");
  Rng rng(2);
  EvalCounter c;
  const auto s = init_rulers(spec, 8, rng, c);
  NeighborhoodOptions opt;
  opt.radius = 1;
  opt.phase = 4;
  const auto prop = neighborhood_eval(s, spec, opt, rng, c);
  for (std::size_t i = 0; i < 8; ++i) {
    const std::size_t k = (i + 4) % 3;
    for (std::size_t q = 0; q < 3; ++q) {
      if (q != k) {
        EXPECT_EQ(prop.row(i)[q], s.at(i, q)) << i << " " << q;
      }
    }
  }
}

TEST(Eval, OriginLowerBoundIsOffsetDifference) {
  const auto spec = make_objective("wild2");
  Rng rng(6);
  EvalCounter c;
  const auto s = init_rulers(spec, 6, rng, c);
  NeighborhoodOptions opt = full(6);
  opt.origin = Origin::lower_bound;
  opt.move = RulerMove::all;
  const auto prop = neighborhood_eval(s, spec, opt, rng, c);
  for (std::size_t i = 0; i < 6; ++i) {
    const std::size_t j = prop.chosen[i];
    for (std::size_t k = 0; k < 2; ++k)
      EXPECT_EQ(prop.row(i)[k], -50.0 + std::fabs(s.at(i, k) - s.at(j, k)));
  }
}

TEST(Eval, RulerMinOriginTracksSmallestMark) {
  const auto spec = make_objective("wild1");
  EvalCounter c;
  const auto s = make_ruler_state(spec, {-10, -5, 0, 5, 20}, c);
  EXPECT_EQ(ruler_origin(s, spec, Origin::ruler_min), (Point{-10.0}));
  EXPECT_EQ(ruler_origin(s, spec, Origin::lower_bound), (Point{-50.0}));
  Rng rng;
  EXPECT_EQ(candidate_coords(s, spec, 3, 1, 0.0, rng, Origin::ruler_min)[0], 0.0);
}

TEST(Eval, TiesGoToLowestNeighbor) {
  // constant objective: every candidate ties
  ObjectiveSpec spec = make_objective("wild1");
  spec.fn = [](std::span<const double>) { return 1.0; };
  Rng rng(3);
  EvalCounter c;
  const auto s = init_rulers(spec, 7, rng, c);
  const auto prop = neighborhood_eval(s, spec, full(7, 0.01), rng, c);
  for (std::size_t i = 0; i < 7; ++i) EXPECT_EQ(prop.chosen[i], prop.neighbors[i].front());
}

TEST(Eval, WorkerCountDoesNotMatter) {
  const auto spec = make_objective("trefethen3");
  Rng init(9);
  EvalCounter c;
  const auto s = init_rulers(spec, 40, init, c);
  auto opt = full(40, 0.01);
  Rng a(5), b(5);
  const auto one = neighborhood_eval(s, spec, opt, a, c);
  opt.workers = 4;
  const auto four = neighborhood_eval(s, spec, opt, b, c);
  EXPECT_EQ(one.coords, four.coords);
  EXPECT_EQ(one.values, four.values);
  EXPECT_EQ(one.chosen, four.chosen);
}

TEST(Eval, RadiusRange) {
  const auto spec = make_objective("ehrenfest4");
  const auto s = golomb(spec);
  Rng rng;
  EvalCounter c;
  NeighborhoodOptions opt;
  opt.radius = 0;
  EXPECT_THROW(neighborhood_eval(s, spec, opt, rng, c), config_error);
  opt.radius = 5;
  EXPECT_THROW(neighborhood_eval(s, spec, opt, rng, c), config_error);
  EXPECT_EQ(c.probes, 0u);
}
