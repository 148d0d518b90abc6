#include "biortheq/cdf.hpp"
#include "biortheq/ensemble.hpp"
#include "biortheq/error.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <map>

using namespace biortheq;

namespace {

GridPtr interval_grid(double a, double b, std::size_t n) {
  return std::make_shared<const GridSet>(build_grid(DomainSet::intervals({{a, b}}), n));
}

GridPtr reals(std::vector<double> xs) {
  return std::make_shared<const GridSet>(GridSet::from_reals(xs));
}

}  // namespace

TEST(BaseMeasure, Constructors) {
  const auto g = interval_grid(0, 1, 10);
  EXPECT_NEAR(BaseMeasure::lebesgue(g).total, 1.0, 1e-15);
  EXPECT_EQ(BaseMeasure::counting(g).total, 10.0);
  EXPECT_NEAR(BaseMeasure::from_density(g, [](Point z) { return z.real(); }).total, 0.5, 1e-12);
  EXPECT_THROW(BaseMeasure::from_weights(g, std::vector<double>(10, 0.0)), StructuralError);
  EXPECT_THROW(BaseMeasure::from_weights(g, std::vector<double>(3, 1.0)), StructuralError);
  EXPECT_NEAR(BaseMeasure::lebesgue(g).scaled(3.0).total, 3.0, 1e-15);
}

TEST(MassDensity, Examples) {
  const auto g = interval_grid(0, 1, 1024);
  const auto leb = BaseMeasure::lebesgue(g);
  EXPECT_TRUE(mass_density_check(leb, 1.0, 0.5).pass);
  const auto fail = mass_density_check(leb, 0.5, 0.25);
  EXPECT_FALSE(fail.pass);
  EXPECT_LT(fail.worst_ratio, 1.0);
  const auto lin = BaseMeasure::from_density(g, [](Point z) { return z.real(); });
  EXPECT_TRUE(mass_density_check(lin, 3.0, 0.5).pass);
}

TEST(Mcmc, ToyChainMatchesEnumeration) {
  const auto g = interval_grid(-1, 1, 6);
  const auto nu = BaseMeasure::counting(g);
  const auto Z = WeightSpec::zero();
  const auto id = MapSpec::identity();
  MetropolisChain chain(nu, 1, Z, id, 2024);
  std::map<std::pair<std::size_t, std::size_t>, double> freq;
  const int steps = 1000000;
  for (int s = 0; s < steps; ++s) {
    chain.step();
    const auto& i = chain.state().indices;
    freq[{i[0], i[1]}] += 1.0 / steps;
  }
  double total = 0.0;
  std::map<std::pair<std::size_t, std::size_t>, double> p;
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j) {
      const double d = std::abs(g->points[i] - g->points[j]);
      total += p[{i, j}] = d * d;
    }
  double tv = 0.0;
  for (const auto& [key, v] : p) tv += std::abs(v / total - freq[key]);
  EXPECT_LE(0.5 * tv, 0.02);
}

TEST(Mcmc, DeterministicAndCounts) {
  const auto nu = BaseMeasure::lebesgue(interval_grid(-1, 1, 80));
  McmcOptions o;
  o.steps = 50000;
  o.burn = 10000;
  o.thin = 7;
  o.seed = 123;
  const auto a = mcmc_sample(nu, 5, WeightSpec::monomial(1, 2), MapSpec::identity(), o);
  const auto b = mcmc_sample(nu, 5, WeightSpec::monomial(1, 2), MapSpec::identity(), o);
  EXPECT_EQ(a.samples, b.samples);
  EXPECT_EQ(a.log_vdm, b.log_vdm);
  EXPECT_EQ(a.mean_cdf, b.mean_cdf);
  EXPECT_EQ(a.size(), (50000u - 10000u) / 7u);
  EXPECT_GE(a.acceptance_rate, 0.0);
  EXPECT_LE(a.acceptance_rate, 1.0);
  EXPECT_LE(a.max_drift, 1e-9);
  for (std::size_t i = 0; i < a.size(); ++i)
    EXPECT_NEAR(a.log_vdm[i], log_vdm(a.points(i), WeightSpec::monomial(1, 2), MapSpec::identity()), 1e-9);
}

TEST(Mcmc, DefaultsAndVisitor) {
  const auto nu = BaseMeasure::lebesgue(interval_grid(-1, 1, 40));
  McmcOptions o;
  o.steps = 8000;
  o.store = false;
  std::size_t seen = 0;
  const auto b = mcmc_sample(nu, 3, WeightSpec::zero(), MapSpec::identity(), o,
                             [&](std::span<const std::size_t> idx, double) {
                               EXPECT_EQ(idx.size(), 4u);
                               ++seen;
                             });
  EXPECT_EQ(b.burn, 2000u);
  EXPECT_EQ(b.thin, 12u);
  EXPECT_EQ(seen, 6000u / 12u);
}

TEST(Mcmc, ZeroBaseMeasureIsStructural) {
  const auto g = interval_grid(-1, 1, 5);
  EXPECT_THROW(BaseMeasure::from_weights(g, {0, 0, 0, 0, 0}), StructuralError);
  const auto sparse = BaseMeasure::from_weights(g, {1, 0, 0, 0, 0});
  McmcOptions o;
  o.steps = 100;
  EXPECT_THROW(mcmc_sample(sparse, 2, WeightSpec::zero(), MapSpec::identity(), o), StructuralError);
}

TEST(ExactZk, HandEnumeration) {
  const auto nu = BaseMeasure::counting(reals({0, 1}));
  EXPECT_NEAR(exact_Zk_grid(nu, 1, WeightSpec::zero(), MapSpec::identity()), 2.0, 1e-14);
  const auto shifted = BaseMeasure::counting(reals({1, 2}));
  EXPECT_NEAR(exact_Zk_grid(shifted, 1, WeightSpec::zero(), MapSpec::power(2)), 6.0, 1e-13);
  EXPECT_THROW(exact_Zk_grid(BaseMeasure::counting(interval_grid(0, 1, 50)), 3, WeightSpec::zero(),
                             MapSpec::identity(), 1e3),
               ResourceError);
}

TEST(ExactZk, ScalingNu) {
  const auto nu = BaseMeasure::lebesgue(interval_grid(0.5, 2, 15));
  const auto Q = WeightSpec::monomial(1, 1);
  for (int k = 1; k <= 3; ++k) {
    const double a = log_exact_Zk_grid(nu, k, Q, MapSpec::power(2));
    const double b = log_exact_Zk_grid(nu.scaled(2.5), k, Q, MapSpec::power(2));
    EXPECT_NEAR(b - a, (k + 1) * std::log(2.5), 1e-12 * std::abs(b));
  }
}

TEST(MonteCarloZk, TwoPointAndReproducible) {
  const auto nu = BaseMeasure::counting(reals({0, 1}));
  const auto e = estimate_Zk_mc(nu, 1, WeightSpec::zero(), MapSpec::identity(), 10000, 5);
  EXPECT_LE(std::abs(e.estimate - 2.0), 3 * e.std_error + 1e-12);
  const auto again = estimate_Zk_mc(nu, 1, WeightSpec::zero(), MapSpec::identity(), 10000, 5);
  EXPECT_EQ(e.estimate, again.estimate);
  EXPECT_THROW(estimate_Zk_mc(nu, 1, WeightSpec::zero(), MapSpec::identity(), 10, 5), ParameterError);
}

TEST(MonteCarloZk, DegenerateWhenTuplesCollide) {
  const auto nu = BaseMeasure::counting(reals({0, 1}));
  const auto e = estimate_Zk_mc(nu, 2, WeightSpec::zero(), MapSpec::identity(), 1000, 1);
  EXPECT_TRUE(e.degenerate);
  EXPECT_EQ(e.estimate, 0.0);
}

TEST(MonteCarloZk, AgreesWithExactSmallGrid) {
  const auto nu = BaseMeasure::lebesgue(interval_grid(0.5, 2, 30));
  const auto Q = WeightSpec::monomial(0.5, 1);
  for (int k = 1; k <= 3; ++k) {
    const double exact = exact_Zk_grid(nu, k, Q, MapSpec::power(2));
    const auto e = estimate_Zk_mc(nu, k, Q, MapSpec::power(2), 50000, 100 + k);
    EXPECT_LE(std::abs(e.estimate - exact), 3 * e.std_error);
  }
}

TEST(ZkRoots, TwoPointRootAndGuard) {
  const auto nu = BaseMeasure::counting(reals({0, 1}));
  const std::vector<int> k1{1};
  const auto s = zk_root_sequence(nu, k1, WeightSpec::zero(), MapSpec::identity(), 1000, 1);
  ASSERT_EQ(s.entries.size(), 1u);
  EXPECT_TRUE(s.entries[0].exact);
  EXPECT_NEAR(s.entries[0].root, 2.0, 1e-14);
  EXPECT_THROW(zk_root_sequence(nu, std::vector<int>{}, WeightSpec::zero(), MapSpec::identity(), 1000, 1),
               ParameterError);
}

TEST(TailProbability, ClampAndMonotone) {
  const auto nu = BaseMeasure::lebesgue(interval_grid(-1, 1, 100));
  McmcOptions o;
  o.steps = 40000;
  o.seed = 4;
  const auto b = mcmc_sample(nu, 6, WeightSpec::zero(), MapSpec::identity(), o);
  EXPECT_EQ(tail_probability(b, 0.5, 0.5), 0.0);
  EXPECT_EQ(tail_probability(b, 1.0, 0.5), 0.0);
  double prev = 1.0;
  for (double eta = 0; eta < 0.6; eta += 0.02) {
    const double p = tail_probability(b, eta, 0.6);
    EXPECT_LE(p, prev);
    prev = p;
  }
  EXPECT_THROW(tail_probability(SampleBatch{}, 0.1, 0.5), StructuralError);
}

TEST(NeighborhoodMass, WholeSpaceAndEquilibriumBall) {
  const auto g = interval_grid(-1, 1, 200);
  const auto nu = BaseMeasure::lebesgue(g);
  McmcOptions o;
  o.steps = 20000ull * 21;
  o.thin = 100;
  o.seed = 9;
  const auto b = mcmc_sample(nu, 20, WeightSpec::zero(), MapSpec::identity(), o);
  const auto all = neighborhood_mass(b, CdfBall{[](double x) { return arcsine_cdf(x); }, 2.0});
  EXPECT_EQ(all.sigma, 1.0);
  EXPECT_EQ(all.root, 0.0);
  const auto near = neighborhood_mass(b, CdfBall{[](double x) { return arcsine_cdf(x); }, 0.1,
                                                 CdfMetric::levy});
  EXPECT_GT(near.sigma, 0.5);
}

TEST(NeighborhoodMass, ZeroHitsAreOneSided) {
  const auto nu = BaseMeasure::lebesgue(interval_grid(-1, 1, 100));
  McmcOptions o;
  o.steps = 20000;
  o.seed = 1;
  const CdfBall far{[](double x) { return uniform_cdf(x, 5, 6); }, 0.05};
  const auto m = neighborhood_mass(nu, 4, WeightSpec::zero(), MapSpec::identity(), far, o);
  EXPECT_EQ(m.hits, 0u);
  EXPECT_TRUE(m.one_sided);
  EXPECT_EQ(m.sigma, 0.0);
  EXPECT_LT(m.root_bound, 0.0);
}

TEST(LdpSlope, Guards) {
  std::vector<NeighborhoodMass> two(2);
  EXPECT_THROW(ldp_slope(two, 0.1), ParameterError);
  std::vector<NeighborhoodMass> zeros(3);
  for (int i = 0; i < 3; ++i) {
    zeros[i].k = 4 + 4 * i;
    zeros[i].one_sided = true;
    zeros[i].root = -kInf;
  }
  EXPECT_TRUE(ldp_slope(zeros, 0.1).degenerate);
}

TEST(LdpSlope, ConsistentSeries) {
  std::vector<NeighborhoodMass> s;
  for (int k : {8, 12, 16}) {
    NeighborhoodMass m;
    m.k = k;
    m.root = -0.2;
    m.sigma = std::exp(-0.2 * k * (k + 1) / 2.0);
    m.hits = 10;
    m.samples = 1000;
    s.push_back(m);
  }
  const auto r = ldp_slope(s, 0.15);
  EXPECT_FALSE(r.degenerate);
  EXPECT_TRUE(r.sigma_decreasing);
  EXPECT_TRUE(r.roots_negative);
  EXPECT_TRUE(r.within_factor);
  EXPECT_NEAR(r.mean_root, -0.2, 1e-15);
}
