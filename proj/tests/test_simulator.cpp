#include <qkdrates/simulator.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace qkdrates;

namespace {

ProtocolConfig config(int d, int mubs, double q, std::int64_t rounds, std::uint64_t seed = 42) {
  ProtocolConfig c;
  c.d = d;
  c.mubs = mubs;
  c.q = q;
  c.rounds = rounds;
  c.seed = seed;
  return c;
}

void expect_within_3sigma(const BasisTally& t, double q) {
  ASSERT_GT(t.sifted, 0);
  const double sigma = std::sqrt(q * (1 - q) / static_cast<double>(t.sifted));
  EXPECT_LE(std::abs(t.rate() - q), 3 * sigma + 1e-15) << to_string(t.basis) << " sifted=" << t.sifted;
}

}  // namespace

TEST(RandomStream, KnownEngineOutputAndRanges) {
  // std::mt19937_64 seeded with 5489 must produce 9981545732273789042 as its 10000th output.
  std::mt19937_64 ref;
  ref.discard(9999);
  EXPECT_EQ(ref(), 9981545732273789042ull);
  RandomStream rng(1);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    EXPECT_LT(rng.below(7), 7u);
  }
}

TEST(HarmTable, MatchesAnalyticRules) {
  for (int d = 2; d <= 7; ++d) {
    const auto t = HarmTable::build(d, {Basis::Z, Basis::X, Basis::XZ});
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) {
        EXPECT_EQ(t.harms(0, {a, b}), a != 0) << d << a << b;
        EXPECT_EQ(t.harms(1, {a, b}), b != 0) << d << a << b;
        EXPECT_EQ(t.harms(2, {a, b}), a != b) << d << a << b;
      }
  }
}

TEST(HarmTable, HarmfulErrorsAreDerangements) {
  for (int d = 2; d <= 7; ++d) {
    const auto t = HarmTable::build(d, {Basis::Z, Basis::X, Basis::XZ});
    for (std::size_t s = 0; s < 3; ++s)
      for (int f = 0; f < d * d; ++f) {
        const auto e = PauliIndex::from_flat(f, d);
        std::vector<int> seen(d, 0);
        bool moved_all = true;
        for (int j = 0; j < d; ++j) {
          ++seen[t.outcome(s, e, j)];
          moved_all = moved_all && t.outcome(s, e, j) != j;
        }
        for (int j = 0; j < d; ++j) EXPECT_EQ(seen[j], 1);
        if (t.harms(s, e)) { EXPECT_TRUE(moved_all); }
      }
  }
}

TEST(HarmTable, CountingIdentity) {
  for (int d = 2; d <= 7; ++d) {
    const auto t = HarmTable::build(d, protocol_bases(3));
    const int xz = t.count_harming(t.slot_of(Basis::XZ));
    EXPECT_EQ(xz, (d - 2) * (d - 1) + 2 * (d - 1));
    EXPECT_EQ(d * d - 1 - 3 * (d - 1), (d - 2) * (d - 1));
    EXPECT_EQ(t.count_harming(t.slot_of(Basis::Z)), d * (d - 1));
    EXPECT_EQ(t.count_harming(t.slot_of(Basis::X)), d * (d - 1));
  }
}

TEST(Session, DeterministicReplay) {
  const auto c = config(3, 3, 0.05, 200'000, 99);
  EXPECT_EQ(run_session(c), run_session(c));
  auto other = c;
  other.seed = 100;
  EXPECT_NE(run_session(c).tallies, run_session(other).tallies);
}

TEST(Session, NoiselessChannel) {
  const auto c = config(4, 2, 0.0, 100'000);
  const auto r = run_session(c);
  EXPECT_EQ(r.empirical_q, 0.0);
  for (const auto& t : r.tallies) EXPECT_EQ(t.errors, 0);
  EntropyMemo memo;
  const auto rk = key_rate_at_k(c.bound, {4, 2, 0.0, c.eps, r.n_sifted, 1.0}, r.k_used, memo);
  ASSERT_TRUE(rk.has_value());
  EXPECT_DOUBLE_EQ(r.rate, *rk);
  EXPECT_DOUBLE_EQ(r.secret_bits, (r.n_sifted - r.k_used) * std::max(*rk, 0.0));
  EXPECT_NEAR(r.nu, serfling_nu(r.n_sifted, r.k_used, c.eps), 1e-15);
}

TEST(Session, QubitBB84ErrorRate) {
  const auto r = run_session(config(2, 2, 0.05, 1'000'000, 7));
  const double sigma = std::sqrt(0.05 * 0.95 / r.k_used);
  EXPECT_LE(std::abs(r.empirical_q - 0.05), 3 * sigma);
  EXPECT_LE(r.n_sifted, r.rounds);
  EXPECT_GE(r.empirical_q, 0.0);
  EXPECT_LE(r.empirical_q, 1.0);
}

TEST(Session, PerBasisRatesForThreeBases) {
  const auto tallies = empirical_error_rates(config(3, 3, 0.05, 1'000'000, 11), 1'000'000);
  ASSERT_EQ(tallies.size(), 3u);
  for (const auto& t : tallies) expect_within_3sigma(t, 0.05);
}

TEST(Session, AnalyticRatesFromCoefficients) {
  // Q_b = (d−1)λ_Z + (d−1)²λ_? for two bases; Q_{b−p} from the three-basis family.
  const auto c2 = solve_2mub(5, 0.1);
  const double qb = 4 * c2.at(1, 0) + 16 * c2.at(1, 1);
  for (const auto& t : empirical_error_rates(config(5, 2, 0.1, 1'000'000, 3), 1'000'000)) expect_within_3sigma(t, qb);
  const auto c3 = solve_3mub(4, 0.08);
  const double qbp = 3 * c3.at(1, 0) + 3 * c3.at(1, 1) + 6 * c3.at(1, 2);
  const auto t3 = empirical_error_rates(config(4, 3, 0.08, 1'000'000, 5), 1'000'000);
  expect_within_3sigma(t3[2], qbp);
}

TEST(Session, IdentityChannelHasNoErrors) {
  for (const auto& t : empirical_error_rates(config(6, 3, 0.0, 50'000), 50'000)) EXPECT_EQ(t.errors, 0);
}

TEST(Session, SiftingFraction) {
  for (int mubs : {2, 3}) {
    auto c = config(3, mubs, 0.05, 400'000, 17);
    const auto p = basis_probabilities(c);
    double expect = 0;
    for (double v : p) expect += v * v;
    const auto r = run_session(c);
    const double frac = static_cast<double>(r.n_sifted) / r.rounds;
    EXPECT_LE(std::abs(frac - expect), 3 * std::sqrt(expect * (1 - expect) / r.rounds));
  }
}

TEST(Session, AbortsWithTooFewEstimationSymbols) {
  auto c = config(2, 2, 0.05, 5);
  c.key_basis_prob = 0.999;
  EXPECT_THROW(run_session(c), SessionAbortedError);
}

TEST(Session, Validation) {
  auto c = config(2, 2, 0.05, 1000);
  c.key_basis_prob = 1.0;
  EXPECT_THROW(run_session(c), ValidationError);
  c = config(2, 2, 0.05, 0);
  EXPECT_THROW(run_session(c), ValidationError);
  c = config(3, 3, 0.05, 1000);
  c.bound = Bound::uncertainty;
  EXPECT_THROW(run_session(c), ValidationError);
  c = config(2, 5, 0.05, 1000);
  EXPECT_THROW(run_session(c), ValidationError);
}
