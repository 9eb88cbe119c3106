#include "satemu/trace_model.h"

#include <numeric>
#include <random>

#include "gtest/gtest.h"
#include "oracle/oracle.h"
#include "satemu/errors.h"
#include "test_util.h"

namespace satemu {
namespace {

constexpr std::int64_t kMs = kMillisecond;

RawTrace Raw(std::vector<std::int64_t> entries,
             Nanoseconds interval = kDefaultSendInterval) {
  return RawTrace{std::move(entries), interval};
}

using ::satemu::testing::ExpectErrorCode;

TEST(SplitTraceTest, SingleLossTakesPredecessorDelay) {
  const SplitResult s = SplitTrace(Raw({50 * kMs, kLost, 60 * kMs}));
  EXPECT_EQ(s.delays.delays,
            (std::vector<std::uint64_t>{50 * kMs, 50 * kMs, 60 * kMs}));
  EXPECT_EQ(s.loss.flags, (std::vector<std::uint8_t>{0, 1, 0}));
  EXPECT_EQ(s.loss.indexing, LossIndexing::kSendOrder);
}

TEST(SplitTraceTest, ConsecutiveLossesCarryForward) {
  const std::vector<std::int64_t> raw{40 * kMs, kLost, kLost, 55 * kMs};
  const auto [want_delays, want_flags] = oracle::Split(raw);
  ASSERT_EQ(want_delays,
            (std::vector<std::uint64_t>{40 * kMs, 40 * kMs, 40 * kMs, 55 * kMs}));
  ASSERT_EQ(want_flags, (std::vector<std::uint8_t>{0, 1, 1, 0}));

  const SplitResult s = SplitTrace(Raw(raw));
  EXPECT_EQ(s.delays.delays, want_delays);
  EXPECT_EQ(s.loss.flags, want_flags);
}

TEST(SplitTraceTest, LeadingLossesTakeFirstDelivered) {
  const std::vector<std::int64_t> raw{kLost, 30 * kMs};
  const auto [want_delays, want_flags] = oracle::Split(raw);
  ASSERT_EQ(want_delays, (std::vector<std::uint64_t>{30 * kMs, 30 * kMs}));

  const SplitResult s = SplitTrace(Raw(raw));
  EXPECT_EQ(s.delays.delays, want_delays);
  EXPECT_EQ(s.loss.flags, (std::vector<std::uint8_t>{1, 0}));
}

TEST(SplitTraceTest, AllDeliveredIsIdentity) {
  const std::vector<std::int64_t> raw{7, 3, 9, 1};
  const SplitResult s = SplitTrace(Raw(raw));
  EXPECT_EQ(s.delays.delays, (std::vector<std::uint64_t>{7, 3, 9, 1}));
  EXPECT_EQ(s.loss.loss_count(), 0u);
}

TEST(SplitTraceTest, Errors) {
  ExpectErrorCode(ErrorCode::kEmptyTrace, [] { SplitTrace(Raw({})); });
  ExpectErrorCode(ErrorCode::kAllLost, [] { SplitTrace(Raw({kLost, kLost})); });
  ExpectErrorCode(ErrorCode::kInvalidEntry, [] { SplitTrace(Raw({5, 0})); });
  ExpectErrorCode(ErrorCode::kInvalidEntry, [] { SplitTrace(Raw({5, -2})); });
}

TEST(SplitTraceTest, MatchesOracleOnRandomTraces) {
  std::mt19937_64 rng(11);
  oracle::RandomTraceSpec spec;
  spec.max_len = 300;
  for (int iter = 0; iter < 500; ++iter) {
    const auto raw = oracle::RandomTrace(rng, spec);
    const auto [want_delays, want_flags] = oracle::Split(raw);
    const SplitResult s = SplitTrace(Raw(raw));
    ASSERT_EQ(s.delays.delays, want_delays);
    ASSERT_EQ(s.loss.flags, want_flags);
    for (std::uint64_t d : s.delays.delays) ASSERT_GT(d, 0u);
  }
}

// A lost packet never overtakes its predecessor.
TEST(SplitTraceTest, LostPacketsArriveInOrder) {
  std::mt19937_64 rng(12);
  oracle::RandomTraceSpec spec;
  spec.max_len = 500;
  for (int iter = 0; iter < 300; ++iter) {
    const auto raw = oracle::RandomTrace(rng, spec);
    const SplitResult s = SplitTrace(Raw(raw));
    for (std::size_t i = 1; i < raw.size(); ++i) {
      if (s.loss.flags[i] == 1) {
        ASSERT_GE(ArrivalTime(i, s.delays.delays[i], kDefaultSendInterval),
                  ArrivalTime(i - 1, s.delays.delays[i - 1],
                              kDefaultSendInterval));
      }
    }
  }
}

TEST(ArrivalOrderTest, LargeDelayIsOvertaken) {
  const DelayTrace d{{30 * kMs, 5 * kMs, 5 * kMs}};
  const std::vector<std::size_t> want{1, 2, 0};
  ASSERT_EQ(oracle::ArrivalOrder(d.delays, 10 * kMs), want);
  EXPECT_EQ(ComputeArrivalOrder(d, 10 * kMs).order, want);
}

TEST(ArrivalOrderTest, ConstantDelayIsIdentity) {
  const DelayTrace d{std::vector<std::uint64_t>(50, 40 * kMs)};
  std::vector<std::size_t> identity(50);
  std::iota(identity.begin(), identity.end(), 0);
  EXPECT_EQ(ComputeArrivalOrder(d, 10 * kMs).order, identity);
}

TEST(ArrivalOrderTest, TiesBreakByAscendingIndex) {
  const DelayTrace d{{20 * kMs, 10 * kMs}};
  const std::vector<std::size_t> want{0, 1};
  ASSERT_EQ(oracle::ArrivalOrder(d.delays, 10 * kMs), want);
  EXPECT_EQ(ComputeArrivalOrder(d, 10 * kMs).order, want);
}

TEST(ArrivalOrderTest, Errors) {
  ExpectErrorCode(ErrorCode::kEmptyTrace,
                  [] { ComputeArrivalOrder(DelayTrace{}, 10); });
  ExpectErrorCode(ErrorCode::kInvalidParams,
                  [] { ComputeArrivalOrder(DelayTrace{{1}}, 0); });
}

TEST(ArrivalOrderTest, MatchesOracleAndIsPermutation) {
  std::mt19937_64 rng(13);
  std::uniform_int_distribution<std::uint64_t> delay(1, 80 * kMs);
  for (int iter = 0; iter < 200; ++iter) {
    DelayTrace d;
    d.delays.resize(1 + rng() % 200);
    // Coarse values make ties frequent.
    for (auto& v : d.delays) v = (delay(rng) / (5 * kMs) + 1) * 5 * kMs;
    const ArrivalPermutation perm = ComputeArrivalOrder(d, 10 * kMs);
    ASSERT_TRUE(perm.is_valid());
    ASSERT_EQ(perm.order, oracle::ArrivalOrder(d.delays, 10 * kMs));
  }
}

TEST(ReorderLossTest, GathersByPermutation) {
  const LossTrace loss{{0, 1, 0}, LossIndexing::kSendOrder};
  const ArrivalPermutation perm{{1, 2, 0}};
  const std::vector<std::uint8_t> want{1, 0, 0};
  ASSERT_EQ(oracle::Gather(loss.flags, perm.order), want);

  const LossTrace out = ReorderLoss(loss, perm);
  EXPECT_EQ(out.flags, want);
  EXPECT_EQ(out.indexing, LossIndexing::kArrivalOrder);
}

TEST(ReorderLossTest, IdentityAndAllZero) {
  const LossTrace loss{{1, 0, 1, 1}, LossIndexing::kSendOrder};
  EXPECT_EQ(ReorderLoss(loss, ArrivalPermutation{{0, 1, 2, 3}}).flags,
            loss.flags);
  const LossTrace zeros{{0, 0, 0, 0}, LossIndexing::kSendOrder};
  EXPECT_EQ(ReorderLoss(zeros, ArrivalPermutation{{3, 1, 0, 2}}).flags,
            zeros.flags);
}

TEST(ReorderLossTest, Errors) {
  ExpectErrorCode(ErrorCode::kLengthMismatch, [] {
    ReorderLoss(LossTrace{{0, 1}, LossIndexing::kSendOrder},
                ArrivalPermutation{{0}});
  });
  ExpectErrorCode(ErrorCode::kWrongIndexing, [] {
    ReorderLoss(LossTrace{{0}, LossIndexing::kArrivalOrder},
                ArrivalPermutation{{0}});
  });
}

TEST(ReorderLossTest, ConservesCountAndInverts) {
  std::mt19937_64 rng(14);
  for (int iter = 0; iter < 200; ++iter) {
    const std::size_t n = 1 + rng() % 300;
    LossTrace loss;
    for (std::size_t i = 0; i < n; ++i) loss.flags.push_back(rng() % 4 == 0);
    ArrivalPermutation perm;
    perm.order.resize(n);
    std::iota(perm.order.begin(), perm.order.end(), 0);
    std::shuffle(perm.order.begin(), perm.order.end(), rng);

    const LossTrace arrival = ReorderLoss(loss, perm);
    ASSERT_EQ(arrival.loss_count(), loss.loss_count());

    // Undo with the inverse permutation.
    LossTrace as_send{arrival.flags, LossIndexing::kSendOrder};
    ASSERT_EQ(ReorderLoss(as_send, perm.inverse()).flags, loss.flags);
  }
}

TEST(ReconstructTest, Definition) {
  const RawTrace raw =
      Reconstruct(DelayTrace{{50 * kMs, 50 * kMs, 60 * kMs}},
                  LossTrace{{0, 1, 0}, LossIndexing::kSendOrder});
  EXPECT_EQ(raw.entries, (std::vector<std::int64_t>{50 * kMs, kLost, 60 * kMs}));

  const RawTrace none = Reconstruct(DelayTrace{{3, 4}},
                                    LossTrace{{0, 0}, LossIndexing::kSendOrder});
  EXPECT_EQ(none.entries, (std::vector<std::int64_t>{3, 4}));
}

TEST(ReconstructTest, Errors) {
  ExpectErrorCode(ErrorCode::kLengthMismatch, [] {
    Reconstruct(DelayTrace{{1, 2}}, LossTrace{{0}, LossIndexing::kSendOrder});
  });
  ExpectErrorCode(ErrorCode::kWrongIndexing, [] {
    Reconstruct(DelayTrace{{1}}, LossTrace{{0}, LossIndexing::kArrivalOrder});
  });
}

TEST(ReconstructTest, RoundTripsRandomTraces) {
  std::mt19937_64 rng(15);
  oracle::RandomTraceSpec spec;
  spec.max_len = 400;
  for (int iter = 0; iter < 1000; ++iter) {
    const RawTrace raw = Raw(oracle::RandomTrace(rng, spec));
    const SplitResult s = SplitTrace(raw);
    const RawTrace back = Reconstruct(s.delays, s.loss, raw.send_interval);
    ASSERT_EQ(back, raw);
    const SplitResult again = SplitTrace(back);
    ASSERT_EQ(again.delays, s.delays);
    ASSERT_EQ(again.loss, s.loss);
  }
}

TEST(ValidateTest, Counts) {
  const TraceDiagnostics d = Validate(Raw({50 * kMs, kLost}));
  EXPECT_EQ(d.entries, 2u);
  EXPECT_EQ(d.losses, 1u);
  EXPECT_EQ(d.invalid, 0u);
  EXPECT_TRUE(d.fits_32bit);
}

TEST(ValidateTest, FiveSecondsDoesNotFit32Bits) {
  // 2^32 - 1 ns is about 4.295 s.
  EXPECT_FALSE(Validate(Raw({5 * kSecond})).fits_32bit);
  EXPECT_TRUE(Validate(Raw({4'294'967'295})).fits_32bit);
  EXPECT_FALSE(Validate(Raw({4'294'967'296})).fits_32bit);
}

TEST(ValidateTest, ZeroIsInvalidAndInputUntouched) {
  const RawTrace raw = Raw({0, -7, 3});
  const RawTrace copy = raw;
  const TraceDiagnostics d = Validate(raw);
  EXPECT_EQ(d.invalid, 2u);
  EXPECT_EQ(d.invalid_indices, (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(raw, copy);
  EXPECT_FALSE(Validate(Raw({1}, 0)).interval_valid);
}

}  // namespace
}  // namespace satemu
