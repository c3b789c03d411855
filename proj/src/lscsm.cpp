#include "idealconv/lscsm.hpp"

#include "idealconv/error.hpp"
#include "idealconv/json_io.hpp"

#include <algorithm>
#include <cmath>

namespace idealconv {

namespace {

Rational ratio(std::uint64_t a, std::uint64_t b) { return Rational(BigInt(a), BigInt(b)); }

// Exact harmonic sums are only attempted over short ranges; longer ranges use
// dyadic floors of chunks [c, c+len) with len ~ c / 2^12, each bounded below
// by len / (c+len-1).
constexpr std::uint64_t kExactHarmonicTerms = 64;
constexpr unsigned kHarmonicChunkShift = 12;

}  // namespace

std::string to_string(LscsmKind k) {
  switch (k) {
    case LscsmKind::DensityFamily: return "density-family";
    case LscsmKind::RunningDensity: return "running-density";
    case LscsmKind::WeightedSum: return "weighted-sum";
    case LscsmKind::CountingCap: return "counting-cap";
  }
  return "?";
}

std::pair<std::uint64_t, std::uint64_t> BlockPartition::block(std::uint64_t n) const {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "block index starts at 1");
  if (n < ends.size()) return {ends[n - 1], ends[n]};
  std::uint64_t hi = ends.back();
  std::uint64_t lo = ends[ends.size() - 2];
  for (std::uint64_t j = ends.size(); j <= n; ++j) {
    lo = hi;
    if (hi > (std::uint64_t{1} << 62)) throw Error(ErrorCode::HorizonExceeded, "block partition overflow");
    hi *= 2;
  }
  return {lo, hi};
}

std::uint64_t BlockPartition::block_of(std::uint64_t i) const {
  if (i < ends.back()) {
    const auto it = std::upper_bound(ends.begin(), ends.end(), i);
    return static_cast<std::uint64_t>(it - ends.begin());
  }
  std::uint64_t n = ends.size() - 1;
  std::uint64_t hi = ends.back();
  while (hi <= i) {
    hi *= 2;
    ++n;
  }
  return n;
}

Lscsm Lscsm::running_density() {
  Lscsm m;
  m.kind_ = LscsmKind::RunningDensity;
  return m;
}

Lscsm Lscsm::counting_cap() {
  Lscsm m;
  m.kind_ = LscsmKind::CountingCap;
  return m;
}

Lscsm Lscsm::harmonic(const Rational& cap) {
  if (cap <= 0) throw Error(ErrorCode::InvalidArgument, "cap must be positive");
  Lscsm m;
  m.kind_ = LscsmKind::WeightedSum;
  m.rule_ = WeightRule::Harmonic;
  m.cap_ = cap;
  return m;
}

Lscsm Lscsm::weighted_table(std::vector<Rational> weights, const Rational& cap) {
  if (cap <= 0) throw Error(ErrorCode::InvalidArgument, "cap must be positive");
  for (const auto& w : weights)
    if (w < 0) throw Error(ErrorCode::InvalidArgument, "weights must be nonnegative");
  Lscsm m;
  m.kind_ = LscsmKind::WeightedSum;
  m.rule_ = WeightRule::Table;
  m.cap_ = cap;
  m.weights_ = std::move(weights);
  return m;
}

Lscsm Lscsm::density_family(BlockPartition blocks, std::vector<Rational> weights) {
  if (blocks.ends.size() < 2 || blocks.ends.front() != 1)
    throw Error(ErrorCode::InvalidArgument, "block partition must start at 1 and have a block");
  for (std::size_t i = 1; i < blocks.ends.size(); ++i)
    if (blocks.ends[i] <= blocks.ends[i - 1]) throw Error(ErrorCode::InvalidArgument, "block ends must increase");
  if (weights.empty()) throw Error(ErrorCode::InvalidArgument, "density family needs weights");
  for (const auto& w : weights)
    if (w <= 0) throw Error(ErrorCode::InvalidArgument, "block weights must be positive");
  Lscsm m;
  m.kind_ = LscsmKind::DensityFamily;
  m.blocks_ = std::move(blocks);
  m.weights_ = std::move(weights);
  return m;
}

std::optional<Rational> Lscsm::raw_norm_of_n() const {
  switch (kind_) {
    case LscsmKind::RunningDensity:
    case LscsmKind::CountingCap: return Rational(1);
    case LscsmKind::WeightedSum:
      if (rule_ == WeightRule::Harmonic) return cap_;
      return std::nullopt;  // finitely supported weights: every tail has mass 0
    case LscsmKind::DensityFamily: return *std::max_element(weights_.begin(), weights_.end());
  }
  return std::nullopt;
}

Lscsm Lscsm::normalized() const {
  const auto n = raw_norm_of_n();
  if (!n) throw Error(ErrorCode::InvalidArgument, "submeasure has ||N|| = 0 and cannot be normalized");
  Lscsm m = *this;
  m.scale_ = 1 / *n;
  return m;
}

Rational Lscsm::weight(std::uint64_t a) const {
  if (rule_ == WeightRule::Harmonic) return ratio(1, a);
  return a <= weights_.size() ? weights_[a - 1] : Rational(0);
}

double Lscsm::weight_double(std::uint64_t a) const {
  if (rule_ == WeightRule::Harmonic) return 1.0 / static_cast<double>(a);
  return a <= weights_.size() ? to_double(weights_[a - 1]) : 0.0;
}

const Rational& Lscsm::block_weight(std::uint64_t n) const { return weights_[(n - 1) % weights_.size()]; }

Rational Lscsm::phi_finite(std::span<const std::uint64_t> sorted) const {
  PhiAccumulator acc(*this);
  for (auto a : sorted) acc.add(a);
  return acc.value();
}

Rational Lscsm::phi(const NatSet& s, std::uint64_t N) const {
  if (N == 0) return 0;
  switch (kind_) {
    case LscsmKind::CountingCap: {
      const auto first = s.next_member(1, N);
      return first ? scale_ : Rational(0);
    }
    case LscsmKind::RunningDensity: {
      const Bits bits = s.prefix(N);
      return scale_ * kernels::tail_running_density(bits, 0, N).value();
    }
    default: break;
  }
  PhiAccumulator acc(*this);
  std::uint64_t from = 1;
  while (from <= N) {
    const auto m = s.next_member(from, N);
    if (!m) break;
    acc.add(*m);
    if (kind_ == LscsmKind::WeightedSum && acc.value() >= scale_ * cap_) break;
    from = *m + 1;
  }
  return acc.value();
}

Rational Lscsm::phi_interval(std::uint64_t lo, std::uint64_t hi) const {
  if (lo < 1 || hi < lo) return 0;
  switch (kind_) {
    case LscsmKind::CountingCap: return scale_;
    case LscsmKind::RunningDensity: return scale_ * ratio(hi - lo + 1, hi);
    case LscsmKind::DensityFamily: {
      Rational best = 0;
      for (std::uint64_t n = blocks_.block_of(lo);; ++n) {
        const auto [a, b] = blocks_.block(n);
        if (a > hi) break;
        const std::uint64_t overlap = std::min(hi + 1, b) - std::max(lo, a);
        best = std::max(best, block_weight(n) * ratio(overlap, b - a));
      }
      return scale_ * best;
    }
    case LscsmKind::WeightedSum: {
      Rational sum = 0;
      const Rational cap = cap_;
      for (std::uint64_t a = lo; a <= hi; ++a) {
        sum += weight(a);
        if (sum >= cap) return scale_ * cap;
        if (rule_ == WeightRule::Table && a >= weights_.size()) break;
      }
      return scale_ * sum;
    }
  }
  return 0;
}

Rational Lscsm::phi_interval_lower(std::uint64_t lo, std::uint64_t hi) const {
  if (kind_ != LscsmKind::WeightedSum || rule_ != WeightRule::Harmonic || hi < lo || hi - lo < kExactHarmonicTerms)
    return phi_interval(lo, hi);
  // Each chunk [c, end] contributes floor(2^62 len / end) / 2^62 <= sum of 1/a.
  unsigned __int128 sum = 0;
  for (std::uint64_t c = lo;;) {
    const std::uint64_t len = std::max<std::uint64_t>(1, c >> kHarmonicChunkShift);
    const std::uint64_t end = len - 1 >= hi - c ? hi : c + len - 1;
    sum += (static_cast<unsigned __int128>(end - c + 1) << 62) / end;
    if (end == hi) break;
    c = end + 1;
  }
  BigInt num = static_cast<std::uint64_t>(sum >> 64);
  num <<= 64;
  num += static_cast<std::uint64_t>(sum);
  const Rational value = Rational(num, BigInt(1) << 62);
  return scale_ * std::min(value, cap_);
}

double Lscsm::phi_full_tail_double(std::uint64_t lo, std::uint64_t hi) const {
  if (hi <= lo) return 0.0;
  const double sc = to_double(scale_);
  switch (kind_) {
    case LscsmKind::CountingCap: return sc;
    case LscsmKind::RunningDensity:
      return sc * static_cast<double>(hi - lo) / static_cast<double>(hi);
    case LscsmKind::WeightedSum: {
      double sum = 0;
      for (std::uint64_t n = lo + 1; n <= hi; ++n) sum += weight_double(n);
      return sc * std::min(sum, to_double(cap_));
    }
    case LscsmKind::DensityFamily: {
      double best = 0;
      for (std::uint64_t n = blocks_.block_of(lo + 1);; ++n) {
        const auto [a, b] = blocks_.block(n);
        if (a > hi) break;
        const std::uint64_t c = std::min(b, hi + 1) - std::max(a, lo + 1);
        best = std::max(best, to_double(block_weight(n)) * static_cast<double>(c) / static_cast<double>(b - a));
      }
      return sc * best;
    }
  }
  return 0;
}

double Lscsm::phi_tail_double(std::span<const std::uint8_t> bits, std::uint64_t lo, std::uint64_t hi) const {
  const double sc = to_double(scale_);
  switch (kind_) {
    case LscsmKind::CountingCap: {
      for (std::uint64_t n = lo + 1; n <= hi; ++n)
        if (bits[n - 1]) return sc;
      return 0.0;
    }
    case LscsmKind::RunningDensity:
      return sc * to_double(kernels::tail_running_density(bits, lo, hi).value());
    case LscsmKind::WeightedSum: {
      double sum = 0;
      for (std::uint64_t n = lo + 1; n <= hi; ++n)
        if (bits[n - 1]) sum += weight_double(n);
      return sc * std::min(sum, to_double(cap_));
    }
    case LscsmKind::DensityFamily: {
      double best = 0;
      if (lo + 1 > hi) return 0;
      for (std::uint64_t n = blocks_.block_of(lo + 1);; ++n) {
        const auto [a, b] = blocks_.block(n);
        if (a > hi) break;
        std::uint64_t c = 0;
        for (std::uint64_t i = std::max(a, lo + 1); i < b && i <= hi; ++i) c += bits[i - 1];
        best = std::max(best, to_double(block_weight(n)) * static_cast<double>(c) / static_cast<double>(b - a));
      }
      return sc * best;
    }
  }
  return 0;
}

std::string Lscsm::describe() const {
  switch (kind_) {
    case LscsmKind::RunningDensity: return "RunningDensity";
    case LscsmKind::CountingCap: return "CountingCap";
    case LscsmKind::WeightedSum:
      return std::string("WeightedSum(") + (rule_ == WeightRule::Harmonic ? "1/a" : "table") + ", cap " +
             to_string(cap_) + ")";
    case LscsmKind::DensityFamily: return "DensityFamily(" + std::to_string(weights_.size()) + " weights)";
  }
  return "?";
}

nlohmann::json Lscsm::to_json() const {
  nlohmann::json j{{"kind", to_string(kind_)}, {"scale", rational_to_json(scale_)}};
  if (kind_ == LscsmKind::WeightedSum) {
    j["weights"] = rule_ == WeightRule::Harmonic ? "harmonic" : "table";
    j["cap"] = rational_to_json(cap_);
  }
  if (kind_ == LscsmKind::DensityFamily) {
    j["block_ends"] = blocks_.ends;
    auto w = nlohmann::json::array();
    for (const auto& x : weights_) w.push_back(rational_to_json(x));
    j["weights"] = w;
  }
  return j;
}

// ---------------------------------------------------------------- accumulator

void PhiAccumulator::add(std::uint64_t a) {
  ++count_;
  switch (m_->kind()) {
    case LscsmKind::CountingCap: break;
    case LscsmKind::RunningDensity:
      // The running ratio only peaks at members, so checking at each add is exact.
      if (kernels::ratio_greater(count_, a, best_.count, best_.n)) best_ = {count_, a};
      break;
    case LscsmKind::WeightedSum:
      if (sum_ < m_->cap()) {
        sum_ += m_->weight_rule() == WeightRule::Harmonic
                    ? Rational(BigInt(1), BigInt(a))
                    : (a <= m_->weights().size() ? m_->weights()[a - 1] : Rational(0));
      }
      break;
    case LscsmKind::DensityFamily: {
      const std::uint64_t b = m_->blocks().block_of(a);
      if (b != cur_block_) {
        cur_block_ = b;
        cur_count_ = 0;
      }
      ++cur_count_;
      const auto [lo, hi] = m_->blocks().block(b);
      const Rational& w = m_->weights()[(b - 1) % m_->weights().size()];
      const Rational v = w * Rational(BigInt(cur_count_), BigInt(hi - lo));
      if (v > block_best_) block_best_ = v;
      break;
    }
  }
}

Rational PhiAccumulator::value() const {
  switch (m_->kind()) {
    case LscsmKind::CountingCap: return count_ ? m_->scale() : Rational(0);
    case LscsmKind::RunningDensity: return m_->scale() * best_.value();
    case LscsmKind::WeightedSum: return m_->scale() * std::min(sum_, m_->cap());
    case LscsmKind::DensityFamily: return m_->scale() * block_best_;
  }
  return 0;
}

}  // namespace idealconv
