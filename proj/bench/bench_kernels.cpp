// Serial reference kernels against their OpenMP versions.

#include "idealconv/kernels.hpp"
#include "idealconv/rng.hpp"
#include "idealconv/sequence.hpp"

#include <benchmark/benchmark.h>

using namespace idealconv;

namespace {

Bits random_bits(std::size_t n, double p, std::uint64_t seed) {
  Rng rng(seed);
  Bits b(n);
  for (auto& x : b) x = rng.bernoulli(p);
  return b;
}

std::vector<Frac> rational_coords(std::size_t n) {
  std::vector<Frac> c;
  c.reserve(n);
  for (std::size_t i = 1; i <= n; ++i) c.push_back(rational_enumeration(i));
  return c;
}

template <bool Parallel>
void BM_Popcount(benchmark::State& st) {
  const Bits b = random_bits(static_cast<std::size_t>(st.range(0)), 0.3, 1);
  for (auto _ : st) {
    auto r = Parallel ? kernels::parallel::popcount(b) : kernels::serial::popcount(b);
    benchmark::DoNotOptimize(r);
  }
  st.SetBytesProcessed(static_cast<std::int64_t>(st.iterations()) * st.range(0));
}

template <bool Parallel>
void BM_OrInto(benchmark::State& st) {
  Bits a = random_bits(static_cast<std::size_t>(st.range(0)), 0.3, 2);
  const Bits b = random_bits(static_cast<std::size_t>(st.range(0)), 0.3, 3);
  for (auto _ : st) {
    if (Parallel) kernels::parallel::or_into(a, b);
    else kernels::serial::or_into(a, b);
    benchmark::ClobberMemory();
  }
}

template <bool Parallel>
void BM_TailRunningDensity(benchmark::State& st) {
  const auto n = static_cast<std::uint64_t>(st.range(0));
  const Bits b = random_bits(n, 0.1, 4);
  for (auto _ : st) {
    auto r = Parallel ? kernels::parallel::tail_running_density(b, n / 2, n)
                      : kernels::serial::tail_running_density(b, n / 2, n);
    benchmark::DoNotOptimize(r);
  }
}

template <bool Parallel>
void BM_BallHits(benchmark::State& st) {
  const auto coords = rational_coords(static_cast<std::size_t>(st.range(0)));
  const PointBlock pts{1, coords};
  const std::vector<Frac> center{Frac(1, 3)};
  for (auto _ : st) {
    auto r = Parallel ? kernels::parallel::ball_hits(pts, center, Frac(1, 64))
                      : kernels::serial::ball_hits(pts, center, Frac(1, 64));
    benchmark::DoNotOptimize(r.data());
  }
}

template <bool Parallel>
void BM_WindowCounts(benchmark::State& st) {
  const auto n = static_cast<std::uint64_t>(st.range(0));
  const auto coords = rational_coords(n);
  const PointBlock pts{1, coords};
  std::vector<Frac> cands;
  for (int j = 0; j <= 64; ++j) cands.emplace_back(j, 64);
  for (auto _ : st) {
    auto r = Parallel ? kernels::parallel::window_counts(pts, cands, Frac(1, 128), n / 2, n)
                      : kernels::serial::window_counts(pts, cands, Frac(1, 128), n / 2, n);
    benchmark::DoNotOptimize(r.data());
  }
}

}  // namespace

BENCHMARK(BM_Popcount<false>)->Name("popcount/serial")->Arg(1 << 20)->Arg(1 << 24);
BENCHMARK(BM_Popcount<true>)->Name("popcount/parallel")->Arg(1 << 20)->Arg(1 << 24);
BENCHMARK(BM_OrInto<false>)->Name("or_into/serial")->Arg(1 << 20)->Arg(1 << 24);
BENCHMARK(BM_OrInto<true>)->Name("or_into/parallel")->Arg(1 << 20)->Arg(1 << 24);
BENCHMARK(BM_TailRunningDensity<false>)->Name("tail_running_density/serial")->Arg(1 << 16)->Arg(1 << 22);
BENCHMARK(BM_TailRunningDensity<true>)->Name("tail_running_density/parallel")->Arg(1 << 16)->Arg(1 << 22);
BENCHMARK(BM_BallHits<false>)->Name("ball_hits/serial")->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(BM_BallHits<true>)->Name("ball_hits/parallel")->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(BM_WindowCounts<false>)->Name("window_counts/serial")->Arg(1 << 14)->Arg(1 << 16);
BENCHMARK(BM_WindowCounts<true>)->Name("window_counts/parallel")->Arg(1 << 14)->Arg(1 << 16);

BENCHMARK_MAIN();
