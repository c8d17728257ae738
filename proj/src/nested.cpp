#include "fpt/nested.hpp"

#include <gmp.h>

#include <atomic>
#include <deque>
#include <limits>
#include <memory>
#include <mutex>
#include <unordered_map>

namespace fpt {

namespace detail {

struct Node {
  int level = 0;
  std::vector<std::string> labels;
  std::vector<Distribution<NestedValue>> coords;
  std::size_t hash = 0;
};

}  // namespace detail

namespace {

std::size_t mix(std::size_t seed, std::size_t value) {
  // boost::hash_combine style, widened for 64 bits.
  return seed ^ (value + 0x9e3779b97f4a7c15ULL + (seed << 12) + (seed >> 4));
}

std::size_t structural_hash(const detail::Node& n) {
  std::size_t h = mix(0x5bd1e995, static_cast<std::size_t>(n.level));
  if (n.level == 0) {
    for (const auto& label : n.labels) h = mix(h, std::hash<std::string>{}(label));
    return mix(h, n.labels.size());
  }
  for (const auto& dist : n.coords) {
    h = mix(h, 0xd15);
    for (const auto& [v, p] : dist) {
      h = mix(h, v.hash());
      h = mix(h, hash_value(p));
    }
  }
  return mix(h, n.coords.size());
}

bool same_content(const detail::Node& a, const detail::Node& b) {
  return a.level == b.level && a.labels == b.labels && a.coords == b.coords;
}

std::atomic<std::size_t> g_node_limit{std::numeric_limits<std::size_t>::max()};

}  // namespace

class Interner {
 public:
  static Interner& instance() {
    static Interner table;
    return table;
  }

  NestedValue intern(detail::Node node) {
    node.hash = structural_hash(node);
    std::lock_guard lock(mutex_);
    auto [first, last] = index_.equal_range(node.hash);
    for (auto it = first; it != last; ++it) {
      if (same_content(*it->second, node)) return NestedValue(it->second);
    }
    if (nodes_.size() >= g_node_limit.load()) {
      throw Error(Errc::kResourceLimit,
                  "nested value table exceeded " + std::to_string(g_node_limit.load()) +
                      " nodes");
    }
    const detail::Node* stored = &nodes_.emplace_back(std::move(node));
    index_.emplace(stored->hash, stored);
    return NestedValue(stored);
  }

  std::size_t size() {
    std::lock_guard lock(mutex_);
    return nodes_.size();
  }

 private:
  std::mutex mutex_;
  // deque keeps element addresses stable.
  std::deque<detail::Node> nodes_;
  std::unordered_multimap<std::size_t, const detail::Node*> index_;
};

NestedValue NestedValue::point(std::vector<std::string> labels) {
  if (labels.empty()) {
    throw Error(Errc::kInvalidArgument, "a point needs at least one label");
  }
  detail::Node node;
  node.labels = std::move(labels);
  return Interner::instance().intern(std::move(node));
}

NestedValue NestedValue::state(std::string label) {
  return point({std::move(label)});
}

NestedValue NestedValue::from_coords(std::vector<Distribution<NestedValue>> coords) {
  if (coords.empty()) {
    throw Error(Errc::kInvalidArgument, "a nested value needs at least one coordinate");
  }
  int level = -1;
  for (const auto& dist : coords) {
    if (dist.size() == 0) {
      throw Error(Errc::kMalformedDistribution, "coordinate distribution is empty");
    }
    for (const auto& [v, p] : dist) {
      if (v.is_null()) throw Error(Errc::kInvalidArgument, "null nested value");
      if (level == -1) level = v.level();
      if (v.level() != level) {
        throw Error(Errc::kInvalidArgument, "coordinates mix nested levels");
      }
    }
  }
  detail::Node node;
  node.level = level + 1;
  node.coords = std::move(coords);
  return Interner::instance().intern(std::move(node));
}

int NestedValue::level() const { return node_->level; }

const std::vector<std::string>& NestedValue::labels() const {
  if (node_->level != 0) {
    throw Error(Errc::kInvalidArgument, "labels requested of a level-" +
                                            std::to_string(node_->level) + " value");
  }
  return node_->labels;
}

std::string NestedValue::point_label() const {
  std::string out;
  for (const auto& label : labels()) {
    if (!out.empty()) out += ':';
    out += label;
  }
  return out;
}

std::size_t NestedValue::timesteps() const { return node_->coords.size(); }

const std::vector<Distribution<NestedValue>>& NestedValue::coords() const {
  return node_->coords;
}

const Distribution<NestedValue>& NestedValue::coord(std::size_t t) const {
  if (node_->level == 0) {
    throw Error(Errc::kInvalidArgument, "level-0 values have no coordinates");
  }
  if (t < 1 || t > node_->coords.size()) {
    throw Error(Errc::kBadTimestep, "timestep " + std::to_string(t) + " outside 1.." +
                                        std::to_string(node_->coords.size()));
  }
  return node_->coords[t - 1];
}

std::size_t NestedValue::hash() const { return node_->hash; }

namespace {

int compare_distributions(const NestedDistribution& a, const NestedDistribution& b) {
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto& [va, pa] = a.entries()[i];
    const auto& [vb, pb] = b.entries()[i];
    if (int c = compare(va, vb); c != 0) return c;
    if (int c = cmp(pa, pb); c != 0) return c < 0 ? -1 : 1;
  }
  if (a.size() == b.size()) return 0;
  return a.size() < b.size() ? -1 : 1;
}

}  // namespace

int compare(NestedValue a, NestedValue b) {
  if (a == b) return 0;
  if (a.level() != b.level()) return a.level() < b.level() ? -1 : 1;
  if (a.level() == 0) {
    const auto& la = a.labels();
    const auto& lb = b.labels();
    const std::size_t n = std::min(la.size(), lb.size());
    for (std::size_t i = 0; i < n; ++i) {
      if (int c = la[i].compare(lb[i]); c != 0) return c < 0 ? -1 : 1;
    }
    return la.size() < lb.size() ? -1 : 1;
  }
  const auto& ca = a.coords();
  const auto& cb = b.coords();
  const std::size_t n = std::min(ca.size(), cb.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (int c = compare_distributions(ca[i], cb[i]); c != 0) return c;
  }
  // Distinct interned values cannot compare equal here.
  return ca.size() < cb.size() ? -1 : 1;
}

bool operator<(NestedValue a, NestedValue b) { return compare(a, b) < 0; }

NestedValue canonicalize(const RawNestedValue& raw) {
  if (raw.coords.empty()) return NestedValue::point(raw.labels);
  std::vector<NestedDistribution> coords;
  coords.reserve(raw.coords.size());
  for (const auto& entries : raw.coords) {
    std::vector<NestedDistribution::Entry> canon;
    canon.reserve(entries.size());
    for (const auto& e : entries) canon.emplace_back(canonicalize(e.value), e.mass);
    coords.push_back(NestedDistribution::from_entries(std::move(canon)));
  }
  return NestedValue::from_coords(std::move(coords));
}

NestedLaw canonicalize(int rank, const std::vector<RawNestedEntry>& raw) {
  std::vector<NestedDistribution::Entry> canon;
  canon.reserve(raw.size());
  for (const auto& e : raw) {
    NestedValue v = canonicalize(e.value);
    if (v.level() != rank) {
      throw Error(Errc::kInvalidArgument, "law of rank " + std::to_string(rank) +
                                              " has a level-" + std::to_string(v.level()) +
                                              " support point");
    }
    canon.emplace_back(v, e.mass);
  }
  return NestedLaw{rank, NestedDistribution::from_entries(std::move(canon))};
}

NestedDistribution dirac(NestedValue v) { return NestedDistribution::dirac(v); }

NestedValue dirac_inv(const NestedDistribution& q) {
  if (!q.is_dirac()) {
    throw Error(Errc::kNotDirac,
                "distribution has " + std::to_string(q.size()) + " support points");
  }
  return q.entries().front().first;
}

const NestedDistribution& terminal_eval(NestedValue z, std::size_t t) { return z.coord(t); }

NestedValue restrict(NestedValue z, int k) {
  if (k < 0 || k > z.level()) {
    throw Error(Errc::kInvalidArgument, "cannot restrict a level-" +
                                            std::to_string(z.level()) + " value to level " +
                                            std::to_string(k));
  }
  while (z.level() > k) {
    const auto& last = z.coords().back();
    if (!last.is_dirac()) {
      throw Error(Errc::kNotTerminating,
                  "terminal coordinate of a level-" + std::to_string(z.level()) +
                      " value is not a Dirac");
    }
    z = last.entries().front().first;
  }
  return z;
}

std::string describe(NestedValue v) {
  if (v.is_null()) return "<null>";
  if (v.level() == 0) return v.point_label();
  std::string out = "(";
  for (std::size_t t = 0; t < v.timesteps(); ++t) {
    if (t) out += ", ";
    out += describe(v.coords()[t]);
  }
  return out + ")";
}

std::string describe(const NestedDistribution& d) {
  std::string out = "{";
  bool first = true;
  for (const auto& [v, p] : d) {
    if (!first) out += ", ";
    first = false;
    out += describe(v) + ": " + to_string(p);
  }
  return out + "}";
}

namespace {

class Writer {
 public:
  void tag(char c) { out_.push_back(static_cast<std::uint8_t>(c)); }
  void u8(std::uint8_t b) { out_.push_back(b); }
  void u32(std::size_t x) {
    if (x > 0xffffffffULL) throw Error(Errc::kResourceLimit, "encoding field too large");
    for (int shift = 24; shift >= 0; shift -= 8) {
      out_.push_back(static_cast<std::uint8_t>((x >> shift) & 0xff));
    }
  }
  void bytes(const std::string& s) {
    u32(s.size());
    out_.insert(out_.end(), s.begin(), s.end());
  }
  void magnitude(const mpz_class& z) {
    std::size_t count = 0;
    const std::size_t size = (mpz_sizeinbase(z.get_mpz_t(), 2) + 7) / 8;
    std::vector<std::uint8_t> buf(size + 1);
    mpz_export(buf.data(), &count, 1, 1, 1, 0, z.get_mpz_t());
    u32(count);
    out_.insert(out_.end(), buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(count));
  }
  void rational(const Rational& q) {
    tag('Q');
    u8(sgn(q) < 0 ? 1 : 0);
    magnitude(abs(q.get_num()));
    magnitude(q.get_den());
  }
  void value(NestedValue v) {
    tag('V');
    u32(static_cast<std::size_t>(v.level()));
    if (v.level() == 0) {
      u32(v.labels().size());
      for (const auto& label : v.labels()) bytes(label);
      return;
    }
    u32(v.timesteps());
    for (const auto& d : v.coords()) distribution(d);
  }
  void distribution(const NestedDistribution& d) {
    tag('D');
    u32(d.size());
    for (const auto& [v, p] : d) {
      value(v);
      rational(p);
    }
  }

  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  void expect(char c) {
    if (pos_ >= in_.size() || in_[pos_] != static_cast<std::uint8_t>(c)) {
      fail(std::string("expected tag '") + c + "'");
    }
    ++pos_;
  }
  std::uint8_t u8() {
    need(1);
    return in_[pos_++];
  }
  std::size_t u32() {
    need(4);
    std::size_t x = 0;
    for (int i = 0; i < 4; ++i) x = (x << 8) | in_[pos_++];
    return x;
  }
  std::string bytes() {
    const std::size_t n = u32();
    need(n);
    std::string s(in_.begin() + static_cast<std::ptrdiff_t>(pos_),
                  in_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
    pos_ += n;
    return s;
  }
  mpz_class magnitude() {
    const std::size_t n = u32();
    need(n);
    if (n > 0 && in_[pos_] == 0) fail("non-minimal magnitude");
    mpz_class z;
    mpz_import(z.get_mpz_t(), n, 1, 1, 1, 0, in_.data() + pos_);
    pos_ += n;
    return z;
  }
  Rational rational() {
    expect('Q');
    const std::uint8_t sign = u8();
    if (sign > 1) fail("bad sign byte");
    mpz_class num = magnitude();
    mpz_class den = magnitude();
    if (den == 0) fail("zero denominator");
    Rational q(num, den);
    if (q.get_num() != num || q.get_den() != den) fail("rational not in lowest terms");
    if (sign == 1) {
      if (num == 0) fail("negative zero");
      q = -q;
    }
    return q;
  }
  NestedValue value(int depth = 0) {
    if (depth > 4096) fail("nesting too deep");
    expect('V');
    const std::size_t level = u32();
    if (level == 0) {
      const std::size_t count = u32();
      if (count == 0) fail("point without labels");
      std::vector<std::string> labels;
      for (std::size_t i = 0; i < count; ++i) labels.push_back(bytes());
      return NestedValue::point(std::move(labels));
    }
    const std::size_t n = u32();
    if (n == 0) fail("nested value without coordinates");
    std::vector<NestedDistribution> coords;
    for (std::size_t t = 0; t < n; ++t) coords.push_back(distribution(depth + 1));
    NestedValue v = NestedValue::from_coords(std::move(coords));
    if (static_cast<std::size_t>(v.level()) != level) fail("level tag mismatch");
    return v;
  }
  NestedDistribution distribution(int depth = 0) {
    expect('D');
    const std::size_t m = u32();
    if (m == 0) fail("empty distribution");
    std::vector<NestedDistribution::Entry> raw;
    for (std::size_t i = 0; i < m; ++i) {
      NestedValue v = value(depth);
      raw.emplace_back(v, rational());
    }
    for (std::size_t i = 1; i < raw.size(); ++i) {
      if (!(raw[i - 1].first < raw[i].first)) fail("support not in canonical order");
    }
    return NestedDistribution::from_entries(std::move(raw));
  }
  void finish() const {
    if (pos_ != in_.size()) fail("trailing bytes");
  }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) fail("truncated input");
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw Error(Errc::kInvalidFile,
                "canonical encoding: " + what + " at byte " + std::to_string(pos_));
  }

  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode(NestedValue v) {
  Writer w;
  w.value(v);
  return w.take();
}

std::vector<std::uint8_t> encode(const NestedDistribution& d) {
  Writer w;
  w.distribution(d);
  return w.take();
}

std::vector<std::uint8_t> encode(const NestedLaw& law) {
  Writer w;
  w.tag('L');
  w.u32(static_cast<std::size_t>(law.rank));
  w.distribution(law.dist);
  return w.take();
}

NestedValue decode_value(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  NestedValue v = r.value();
  r.finish();
  return v;
}

NestedLaw decode_law(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  r.expect('L');
  const std::size_t rank = r.u32();
  NestedDistribution d = r.distribution();
  r.finish();
  for (const auto& [v, p] : d) {
    if (static_cast<std::size_t>(v.level()) != rank) {
      throw Error(Errc::kInvalidFile, "law support level differs from its rank");
    }
  }
  return NestedLaw{static_cast<int>(rank), std::move(d)};
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (std::uint8_t b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xf]);
  }
  return out;
}

std::vector<std::uint8_t> from_hex(std::string_view hex) {
  auto digit = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  if (hex.size() % 2 != 0) throw Error(Errc::kInvalidFile, "odd-length hex string");
  std::vector<std::uint8_t> out;
  out.reserve(hex.size() / 2);
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    const int hi = digit(hex[i]);
    const int lo = digit(hex[i + 1]);
    if (hi < 0 || lo < 0) throw Error(Errc::kInvalidFile, "invalid hex digit");
    out.push_back(static_cast<std::uint8_t>(hi * 16 + lo));
  }
  return out;
}

void set_node_limit(std::size_t limit) { g_node_limit.store(limit); }

std::size_t node_limit() { return g_node_limit.load(); }

std::size_t interned_node_count() { return Interner::instance().size(); }

}  // namespace fpt
