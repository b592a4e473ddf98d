#include "doctest.h"
#include "kbe/selfenergy.hpp"
#include "support.hpp"

using namespace kbe;

namespace {

SigmaInput input_of(const std::vector<Mat2>& a, const std::vector<Mat2>& b, double u = 0.7, double up = 1.3) {
  return {a, b, u, up};
}

}  // namespace

TEST_CASE("frontier pairs") {
  CHECK(frontier_pairs(0) == std::vector<TimePair>{{0, 0}});
  const auto p = frontier_pairs(2);
  REQUIRE(p.size() == 5);
  CHECK(p[0] == TimePair{0, 2});
  CHECK(p[2] == TimePair{2, 0});
  CHECK(p[4] == TimePair{2, 2});
}

TEST_CASE("factorized and chunked terms match naive sums") {
  for (int n : {2, 4, 8, 16}) {
    const KGrid g(n);
    std::mt19937_64 rng(100 + n);
    const auto a = oracle::random_mats(n, rng);
    const auto b = oracle::random_mats(n, rng);
    const auto in = input_of(a, b);
    const engine::ShardRange all{1, n};
    const auto p = polarizability(in, g);
    const auto s1 = sigma_first(p, in, g, all);
    const auto s2 = sigma_second(in, g, all);
    CHECK(oracle::rel_err(s1.values, oracle::naive_sigma_first(g, a, b, 0.7, 1.3)) <= 1e-10);
    CHECK(oracle::rel_err(s2.values, oracle::naive_sigma_second(g, a, b, 0.7, 1.3)) <= 1e-10);
    const auto s = assemble_sigma(s1, s2);
    for (int k = 0; k < n; ++k) CHECK(s.values[k] == s1.values[k] - s2.values[k]);
  }
}

TEST_CASE("schedules agree") {
  const int n = 16;
  const KGrid g(n);
  std::mt19937_64 rng(9);
  const auto a = oracle::random_mats(n, rng);
  const auto b = oracle::random_mats(n, rng);
  const auto in = input_of(a, b);
  const engine::ShardRange all{1, n};
  const auto ref = sigma_second(in, g, all);
  engine::Schedule s;
  s.index_mode = engine::IndexMode::lookup;
  CHECK(sigma_second(in, g, all, s).values == ref.values);
  s.workers = 3;
  CHECK(sigma_second(in, g, all, s).values == ref.values);
  for (int block : {1, 5, 64, 1000}) {
    for (bool fused : {true, false}) {
      engine::Schedule t;
      t.block_size = block;
      t.fusion_enabled = fused;
      CHECK(oracle::rel_err(sigma_second(in, g, all, t).values, ref.values) <= 1e-12);
    }
  }
  // A shard sees exactly its slice of the full result.
  const auto part = sigma_second(in, g, {5, 4});
  for (int k = 0; k < 4; ++k) CHECK(part.values[k] == ref.values[4 + k]);
}

TEST_CASE("zero interaction or zero input gives zero") {
  const KGrid g(4);
  std::mt19937_64 rng(1);
  const auto a = oracle::random_mats(4, rng);
  const std::vector<Mat2> z(4);
  const engine::ShardRange all{1, 4};
  for (const auto& m : sigma_second(input_of(a, a, 0.0, 1.0), g, all).values) CHECK(max_abs(m) == 0.0);
  for (const auto& m : sigma_second(input_of(a, z), g, all).values) CHECK(max_abs(m) == 0.0);
  const std::vector<Mat2> short_b(3);
  CHECK_THROWS_AS(sigma_second(input_of(a, short_b), g, all), ContractViolation);
}

TEST_CASE("batched and looped frontier evaluation agree") {
  for (int nt : {1, 2, 8, 16}) {
    const int n = nt - 1;
    const KGrid g(8);
    std::mt19937_64 rng(nt);
    TwoTimeFunction gf(8, 0, std::max(n, 1), 0.1);
    oracle::fill_random(gf, n, rng);
    const auto fr = frontier_of(gf, n);
    ModelConfig model;
    model.u_constant = 0.9;
    for (int shards : {1, 2}) {
      engine::Schedule s;
      s.n_shards = shards;
      engine::Executor ex(s);
      SelfEnergyKernels kern(g, ex);
      for (const auto& r : engine::shard_ranges(8, shards)) {
        TwoTimeFunction batched(r.k_count, r.k_offset(), std::max(n, 1), 0.1);
        TwoTimeFunction looped(r.k_count, r.k_offset(), std::max(n, 1), 0.1);
        evaluate_sigma_batched(batched, fr, model, kern);
        evaluate_sigma_looped(looped, fr, model, kern);
        for (auto c : {Component::lesser, Component::greater})
          CHECK(oracle::rel_err(batched.data(c), looped.data(c)) <= 1e-12);
      }
    }
    engine::Schedule unbatched;
    unbatched.batch_enabled = false;
    engine::Executor ex(unbatched);
    SelfEnergyKernels kern(g, ex);
    TwoTimeFunction x(8, 0, std::max(n, 1), 0.1), y(8, 0, std::max(n, 1), 0.1);
    evaluate_sigma_batched(x, fr, model, kern);
    evaluate_sigma_looped(y, fr, model, kern);
    CHECK(x.data(Component::lesser) == y.data(Component::lesser));
  }
}

TEST_CASE("lesser and greater contractions swap roles") {
  const KGrid g(4);
  std::mt19937_64 rng(4);
  TwoTimeFunction gf(4, 0, 1, 0.1);
  oracle::fill_random(gf, 1, rng);
  const auto fr = frontier_of(gf, 1);
  ModelConfig model;
  model.u_constant = 1.0;
  const auto in = sigma_input(fr, {0, 1}, Component::lesser, model);
  for (int k = 0; k < 4; ++k) {
    CHECK(in.a[k] == gf.at(Component::lesser, k, 0, 1));
    CHECK(in.b[k] == gf.at(Component::greater, k, 1, 0));
  }
  const auto ig = sigma_input(fr, {1, 0}, Component::greater, model);
  for (int k = 0; k < 4; ++k) {
    CHECK(ig.a[k] == gf.at(Component::greater, k, 1, 0));
    CHECK(ig.b[k] == gf.at(Component::lesser, k, 0, 1));
  }
  CHECK_THROWS_AS(sigma_input(fr, {0, 0}, Component::lesser, model), ContractViolation);
}
