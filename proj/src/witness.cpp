#include "idealconv/witness.hpp"

#include "idealconv/error.hpp"

#include <algorithm>

namespace idealconv {

namespace {
constexpr std::uint64_t kMaterializeLimit = std::uint64_t{1} << 62;
}

std::string to_string(CertRule rule) {
  switch (rule) {
    case CertRule::DensityRatio: return "density-ratio";
    case CertRule::PhiBlock: return "phi-block";
    case CertRule::RowCoverage: return "row-coverage";
  }
  return "?";
}

std::string to_string(WitnessGenerator gen) {
  switch (gen) {
    case WitnessGenerator::Geometric: return "geometric";
    case WitnessGenerator::Unit: return "unit";
    case WitnessGenerator::RowCoverage: return "row-coverage";
    case WitnessGenerator::Table: return "table";
  }
  return "?";
}

CertRule cert_rule_from_string(const std::string& s) {
  if (s == "density-ratio") return CertRule::DensityRatio;
  if (s == "phi-block") return CertRule::PhiBlock;
  if (s == "row-coverage") return CertRule::RowCoverage;
  throw Error(ErrorCode::InvalidArgument, "unknown certifying rule: " + s);
}

WitnessGenerator witness_generator_from_string(const std::string& s) {
  if (s == "geometric") return WitnessGenerator::Geometric;
  if (s == "unit") return WitnessGenerator::Unit;
  if (s == "row-coverage") return WitnessGenerator::RowCoverage;
  if (s == "table") return WitnessGenerator::Table;
  throw Error(ErrorCode::InvalidArgument, "unknown witness generator: " + s);
}

WitnessIntervals WitnessIntervals::geometric(std::uint64_t start, const Rational& q) {
  if (start < 1) throw Error(ErrorCode::InvalidArgument, "witness start must be >= 1");
  if (q <= 0 || q >= 1) throw Error(ErrorCode::InvalidArgument, "witness ratio q must lie in (0,1)");
  auto d = std::make_shared<Data>();
  d->generator = WitnessGenerator::Geometric;
  d->rule = CertRule::DensityRatio;
  d->q0 = q;
  d->start = start;
  d->q = q;
  const BigInt num = boost::multiprecision::numerator(q);
  const BigInt den = boost::multiprecision::denominator(q);
  std::uint64_t cur = start;
  d->iota.push_back(cur);
  while (cur < kMaterializeLimit) {
    // ceil(cur * den / (den - num))
    const BigInt top = BigInt(cur) * den;
    const BigInt bot = den - num;
    BigInt next = (top + bot - 1) / bot;
    if (next <= cur) next = cur + 1;
    if (next > kMaterializeLimit) break;
    cur = next.convert_to<std::uint64_t>();
    d->iota.push_back(cur);
  }
  return WitnessIntervals(std::move(d));
}

WitnessIntervals WitnessIntervals::unit() {
  auto d = std::make_shared<Data>();
  d->generator = WitnessGenerator::Unit;
  d->rule = CertRule::PhiBlock;
  d->q0 = 1;
  return WitnessIntervals(std::move(d));
}

WitnessIntervals WitnessIntervals::row_coverage() {
  auto d = std::make_shared<Data>();
  d->generator = WitnessGenerator::RowCoverage;
  d->rule = CertRule::RowCoverage;
  d->q0 = 1;
  std::uint64_t cur = 1;
  d->iota.push_back(cur);
  for (std::uint64_t n = 1; n + 1 < 62; ++n) {
    cur += std::uint64_t{1} << (n + 1);
    d->iota.push_back(cur);
  }
  return WitnessIntervals(std::move(d));
}

WitnessIntervals WitnessIntervals::table(std::vector<std::uint64_t> iota, CertRule rule, const Rational& q0) {
  if (iota.empty() || iota.front() < 1) throw Error(ErrorCode::InvalidArgument, "witness table must start at >= 1");
  for (std::size_t i = 1; i < iota.size(); ++i) {
    if (iota[i] <= iota[i - 1]) throw Error(ErrorCode::InvalidArgument, "witness table must be strictly increasing");
  }
  auto d = std::make_shared<Data>();
  d->generator = WitnessGenerator::Table;
  d->rule = rule;
  d->q0 = q0;
  d->iota = std::move(iota);
  return WitnessIntervals(std::move(d));
}

WitnessIntervals WitnessIntervals::with_certificate(CertRule rule, const Rational& q0, std::string ideal) const {
  auto d = std::make_shared<Data>(*data_);
  d->rule = rule;
  d->q0 = q0;
  d->ideal = std::move(ideal);
  return WitnessIntervals(std::move(d));
}

std::optional<std::uint64_t> WitnessIntervals::iota(std::uint64_t n) const {
  if (n == 0) return std::nullopt;
  if (data_->generator == WitnessGenerator::Unit) return n;
  if (n > data_->iota.size()) return std::nullopt;
  return data_->iota[n - 1];
}

std::uint64_t WitnessIntervals::known_blocks() const {
  if (data_->generator == WitnessGenerator::Unit) return kMaterializeLimit;
  return data_->iota.empty() ? 0 : data_->iota.size() - 1;
}

std::optional<std::uint64_t> WitnessIntervals::block_of(std::uint64_t i) const {
  if (data_->generator == WitnessGenerator::Unit) return i;
  const auto& io = data_->iota;
  if (i < io.front()) return 0;
  if (i >= io.back()) return std::nullopt;
  const auto it = std::upper_bound(io.begin(), io.end(), i);
  return static_cast<std::uint64_t>(it - io.begin());
}

bool WitnessIntervals::lengths_grow() const {
  return data_->generator == WitnessGenerator::Geometric || data_->generator == WitnessGenerator::RowCoverage;
}

std::vector<std::uint64_t> WitnessIntervals::iota_prefix(std::uint64_t limit) const {
  std::vector<std::uint64_t> out;
  for (std::uint64_t n = 1;; ++n) {
    const auto v = iota(n);
    if (!v) break;
    out.push_back(*v);
    if (*v > limit) break;
  }
  return out;
}

bool operator==(const WitnessIntervals& a, const WitnessIntervals& b) {
  if (a.data_ == b.data_) return true;
  const auto& x = *a.data_;
  const auto& y = *b.data_;
  return x.generator == y.generator && x.rule == y.rule && x.q0 == y.q0 && x.ideal == y.ideal &&
         x.start == y.start && x.q == y.q && x.iota == y.iota;
}

}  // namespace idealconv
