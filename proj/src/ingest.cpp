#include "murmur/ingest.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

namespace murmur::ingest {

int NewformRecord::al_at(long long q) const {
  for (const auto& [p, lam] : al_eigenvalues)
    if (p == q) return lam;
  throw domain_error("no Atkin-Lehner eigenvalue stored at q=" + std::to_string(q));
}

long long Dataset::prime_index(long long p) const {
  auto it = std::lower_bound(primes.begin(), primes.end(), p);
  if (it == primes.end() || *it != p) return -1;
  return it - primes.begin();
}

// ---------------------------------------------------------------------
// text parsing
// ---------------------------------------------------------------------

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

std::string strip(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

long long parse_int(const std::string& s, long line, const char* what) {
  try {
    size_t pos = 0;
    long long v = std::stoll(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw validation_error(std::string("bad integer for ") + what + ": '" + s + "'", line);
  }
}

int parse_sign(const std::string& s, long line, const char* what) {
  if (s == "1" || s == "+1") return 1;
  if (s == "-1") return -1;
  throw validation_error(std::string(what) + " must be +-1, got '" + s + "'", line);
}

bool squarefree_trial(long long n) {
  for (long long d = 2; d * d <= n; ++d)
    if (n % (d * d) == 0) return false;
  return true;
}

std::vector<long long> prime_divisors_trial(long long n) {
  std::vector<long long> ps;
  for (long long d = 2; d * d <= n; ++d) {
    if (n % d == 0) {
      ps.push_back(d);
      while (n % d == 0) n /= d;
    }
  }
  if (n > 1) ps.push_back(n);
  return ps;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw validation_error("cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

}  // namespace

Dataset parse_newforms(const std::string& path) {
  std::vector<std::string> lines = read_lines(path);
  if (lines.empty()) throw validation_error("empty newform file " + path);

  const std::string header = strip(lines[0]);
  const std::string prefix = "#murmur-newforms v1 pmax=";
  if (header.rfind(prefix, 0) != 0)
    throw validation_error("bad newform header, expected '" + prefix + "<P>'", 1);
  long long pmax = parse_int(header.substr(prefix.size()), 1, "pmax");
  if (pmax < 2) throw validation_error("pmax must be >= 2", 1);

  Dataset ds;
  ds.kind = DataKind::Newforms;
  ds.pmax = pmax;
  ds.primes = arith::primes_up_to(pmax);

  std::set<std::pair<long long, std::string>> seen;
  for (size_t i = 1; i < lines.size(); ++i) {
    const long line_no = static_cast<long>(i + 1);
    std::string line = strip(lines[i]);
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> f = split(line, ',');
    if (f.size() != 7)
      throw validation_error("expected 7 comma fields, got " + std::to_string(f.size()), line_no);

    NewformRecord rec;
    rec.level = parse_int(f[0], line_no, "level");
    if (rec.level < 1) throw validation_error("level must be positive", line_no);
    if (!squarefree_trial(rec.level)) throw validation_error("level must be squarefree", line_no);
    rec.weight = static_cast<int>(parse_int(f[1], line_no, "weight"));
    if (rec.weight < 2 || rec.weight % 2 != 0)
      throw validation_error("weight must be a positive even integer", line_no);
    rec.orbit_label = strip(f[2]);
    if (rec.orbit_label.empty()) throw validation_error("orbit label must be nonempty", line_no);
    rec.orbit_dim = parse_int(f[3], line_no, "orbit_dim");
    if (rec.orbit_dim < 1) throw validation_error("orbit_dim must be >= 1", line_no);
    rec.global_root = parse_sign(strip(f[4]), line_no, "root");

    std::vector<long long> level_primes = prime_divisors_trial(rec.level);
    std::set<long long> al_seen;
    for (const std::string& item : split(strip(f[5]), ';')) {
      if (strip(item).empty()) continue;
      std::vector<std::string> kv = split(strip(item), ':');
      if (kv.size() != 2) throw validation_error("bad al entry '" + item + "'", line_no);
      long long q = parse_int(kv[0], line_no, "al prime");
      int lam = parse_sign(kv[1], line_no, "al eigenvalue");
      if (!al_seen.insert(q).second)
        throw validation_error("duplicate al prime " + std::to_string(q), line_no);
      rec.al_eigenvalues.emplace_back(q, lam);
    }
    std::set<long long> want(level_primes.begin(), level_primes.end());
    if (al_seen != want)
      throw validation_error("al primes must be exactly the prime divisors of the level", line_no);

    for (const std::string& item : split(strip(f[6]), ';'))
      rec.ap_traces.push_back(parse_int(strip(item), line_no, "ap"));
    if (rec.ap_traces.size() != ds.primes.size())
      throw validation_error("expected " + std::to_string(ds.primes.size()) + " ap values, got " +
                                 std::to_string(rec.ap_traces.size()),
                             line_no);

    // root consistency: global root = (-1)^(k/2) * prod over level primes
    // of the Atkin-Lehner eigenvalue
    int prod = (rec.weight / 2) % 2 == 0 ? 1 : -1;
    for (const auto& [q, lam] : rec.al_eigenvalues) {
      (void)q;
      prod *= lam;
    }
    if (prod != rec.global_root)
      throw validation_error("declared root inconsistent with Atkin-Lehner eigenvalues", line_no);

    if (!seen.insert({rec.level, rec.orbit_label}).second)
      throw validation_error("duplicate orbit " + std::to_string(rec.level) + rec.orbit_label,
                             line_no);
    ds.newforms.push_back(std::move(rec));
  }
  if (ds.newforms.empty()) throw validation_error("newform file has no records");
  return ds;
}

Dataset parse_curves(const std::string& path) {
  std::vector<std::string> lines = read_lines(path);
  if (lines.empty()) throw validation_error("empty curve file " + path);
  if (strip(lines[0]) != "#murmur-curves v1")
    throw validation_error("bad curve header, expected '#murmur-curves v1'", 1);

  Dataset ds;
  ds.kind = DataKind::Curves;
  std::set<std::string> seen;
  for (size_t i = 1; i < lines.size(); ++i) {
    const long line_no = static_cast<long>(i + 1);
    std::string line = strip(lines[i]);
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::vector<std::string> f;
    std::string tok;
    while (ss >> tok) f.push_back(tok);
    if (f.size() != 8)
      throw validation_error("expected 8 fields, got " + std::to_string(f.size()), line_no);

    CurveRecord rec;
    rec.conductor = parse_int(f[0], line_no, "conductor");
    if (rec.conductor < 1) throw validation_error("conductor must be positive", line_no);
    rec.label = f[1];
    for (int j = 0; j < 5; ++j) rec.a_invariants[j] = parse_int(f[2 + j], line_no, "a-invariant");
    rec.global_root = parse_sign(f[7], line_no, "root");
    if (curve_discriminant(rec) == 0)
      throw validation_error("singular model (discriminant 0)", line_no);
    if (!seen.insert(rec.label).second)
      throw validation_error("duplicate curve label " + rec.label, line_no);
    ds.curves.push_back(std::move(rec));
  }
  if (ds.curves.empty()) throw validation_error("curve file has no records");
  return ds;
}

std::string serialize_newforms(const Dataset& ds) {
  if (ds.kind != DataKind::Newforms) throw domain_error("dataset does not hold newforms");
  std::ostringstream out;
  out << "#murmur-newforms v1 pmax=" << ds.pmax << "\n";
  for (const NewformRecord& r : ds.newforms) {
    out << r.level << ',' << r.weight << ',' << r.orbit_label << ',' << r.orbit_dim << ','
        << r.global_root << ',';
    for (size_t i = 0; i < r.al_eigenvalues.size(); ++i) {
      if (i) out << ';';
      out << r.al_eigenvalues[i].first << ':' << r.al_eigenvalues[i].second;
    }
    out << ',';
    for (size_t i = 0; i < r.ap_traces.size(); ++i) {
      if (i) out << ';';
      out << r.ap_traces[i];
    }
    out << "\n";
  }
  return out.str();
}

std::string serialize_curves(const Dataset& ds) {
  if (ds.kind != DataKind::Curves) throw domain_error("dataset does not hold curves");
  std::ostringstream out;
  out << "#murmur-curves v1\n";
  for (const CurveRecord& r : ds.curves) {
    out << r.conductor << ' ' << r.label;
    for (long long a : r.a_invariants) out << ' ' << a;
    out << ' ' << r.global_root << "\n";
  }
  return out.str();
}

// ---------------------------------------------------------------------
// point counting
// ---------------------------------------------------------------------

i128 curve_discriminant(const CurveRecord& curve) {
  const auto& a = curve.a_invariants;
  i128 a1 = a[0], a2 = a[1], a3 = a[2], a4 = a[3], a6 = a[4];
  i128 b2 = checked_add(checked_mul(a1, a1), checked_mul(4, a2));
  i128 b4 = checked_add(checked_mul(2, a4), checked_mul(a1, a3));
  i128 b6 = checked_add(checked_mul(a3, a3), checked_mul(4, a6));
  i128 b8 = checked_sub(
      checked_add(checked_add(checked_mul(checked_mul(a1, a1), a6), checked_mul(checked_mul(4, a2), a6)),
                  checked_sub(checked_mul(a2, checked_mul(a3, a3)),
                              checked_mul(checked_mul(a1, a3), a4))),
      checked_mul(a4, a4));
  i128 d = checked_sub(checked_sub(checked_sub(checked_mul(9, checked_mul(b2, checked_mul(b4, b6))),
                                               checked_mul(checked_mul(b2, b2), b8)),
                                   checked_mul(8, checked_mul(b4, checked_mul(b4, b4)))),
                       checked_mul(27, checked_mul(b6, b6)));
  return d;
}

long long curve_ap(const CurveRecord& curve, long long p) {
  if (p < 2) throw domain_error("curve_ap expects a prime p");
  if (curve.conductor % p == 0)
    throw domain_error("bad reduction: p divides the conductor of " + curve.label);
  const auto& a = curve.a_invariants;

  if (p == 2) {
    long long count = 1;  // point at infinity
    for (long long x = 0; x < 2; ++x) {
      for (long long y = 0; y < 2; ++y) {
        long long lhs = y * y + a[0] * x * y + a[2] * y;
        long long rhs = x * x * x + a[1] * x * x + a[3] * x + a[4];
        if (((lhs - rhs) % 2 + 2) % 2 == 0) ++count;
      }
    }
    return 3 - count;
  }

  // complete the square: (2y + a1 x + a3)^2 = 4x^3 + b2 x^2 + 2b4 x + b6
  long long b2 = ((a[0] * a[0] + 4 * a[1]) % p + p) % p;
  long long b4 = ((2 * a[3] + a[0] * a[2]) % p + p) % p;
  long long b6 = ((a[2] * a[2] + 4 * a[4]) % p + p) % p;

  std::vector<signed char> chi(static_cast<size_t>(p), -1);
  chi[0] = 0;
  for (long long t = 1; t <= (p - 1) / 2; ++t) chi[(t * t) % p] = 1;

  long long sum = 0;
  for (long long x = 0; x < p; ++x) {
    long long fx = (((4 * x + b2) % p) * x % p + 2 * b4) % p;
    fx = (fx * x + b6) % p;
    sum += chi[fx];
  }
  return -sum;
}

// ---------------------------------------------------------------------
// binary cache
// ---------------------------------------------------------------------

std::uint64_t fnv1a64(const void* data, size_t len) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  std::uint64_t h = 14695981039346656037ULL;
  for (size_t i = 0; i < len; ++i) {
    h ^= bytes[i];
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t fnv1a64_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw validation_error("cannot open " + path);
  std::uint64_t h = 14695981039346656037ULL;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ULL;
    }
  }
  return h;
}

namespace {

constexpr char kMagic[4] = {'M', 'U', 'R', 'M'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint8_t kKindFactor = 1;
constexpr std::uint8_t kKindHurwitz = 2;

template <typename T>
void put_le(std::string& out, T v) {
  for (size_t i = 0; i < sizeof(T); ++i) out += static_cast<char>((v >> (8 * i)) & 0xFF);
}

template <typename T>
T get_le(const std::string& buf, size_t& pos) {
  if (pos + sizeof(T) > buf.size()) throw truncation_error("table cache file is truncated");
  T v = 0;
  for (size_t i = 0; i < sizeof(T); ++i)
    v |= static_cast<T>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
  pos += sizeof(T);
  return v;
}

void save_table_file(const std::string& path, std::uint8_t kind, std::uint64_t limit,
                     const std::string& payload) {
  std::string out;
  out.append(kMagic, 4);
  put_le<std::uint32_t>(out, kVersion);
  out += static_cast<char>(kind);
  put_le<std::uint64_t>(out, limit);
  out += payload;
  put_le<std::uint64_t>(out, fnv1a64(payload.data(), payload.size()));
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw resource_error("cannot write " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw resource_error("short write to " + path);
}

std::string load_table_file(const std::string& path, std::uint8_t want_kind, std::uint64_t* limit) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw validation_error("cannot open " + path);
  std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  size_t pos = 0;
  if (buf.size() < 4 || std::memcmp(buf.data(), kMagic, 4) != 0)
    throw format_error("not a table cache file: bad magic");
  pos = 4;
  std::uint32_t version = get_le<std::uint32_t>(buf, pos);
  if (version != kVersion)
    throw format_error("unsupported table cache version " + std::to_string(version));
  std::uint8_t kind = static_cast<std::uint8_t>(buf[pos++]);
  if (kind != want_kind) throw format_error("table cache holds a different table kind");
  *limit = get_le<std::uint64_t>(buf, pos);

  size_t entry = kind == kKindFactor ? sizeof(std::uint32_t) : sizeof(std::int64_t);
  size_t payload_len = (static_cast<size_t>(*limit) + 1) * entry;
  if (buf.size() < pos + payload_len + 8) throw truncation_error("table cache file is truncated");
  std::string payload = buf.substr(pos, payload_len);
  pos += payload_len;
  std::uint64_t digest = get_le<std::uint64_t>(buf, pos);
  if (digest != fnv1a64(payload.data(), payload.size()))
    throw checksum_error("table cache checksum mismatch");
  return payload;
}

}  // namespace

void save_factor_table(const std::string& path, const arith::FactorTable& table) {
  std::string payload;
  payload.reserve(table.spf.size() * 4);
  for (std::uint32_t v : table.spf) put_le<std::uint32_t>(payload, v);
  save_table_file(path, kKindFactor, static_cast<std::uint64_t>(table.limit), payload);
}

void save_hurwitz_table(const std::string& path, const quadforms::HurwitzTable& table) {
  std::string payload;
  payload.reserve(table.num12.size() * 8);
  for (std::int32_t v : table.num12)
    put_le<std::uint64_t>(payload, static_cast<std::uint64_t>(static_cast<std::int64_t>(v)));
  save_table_file(path, kKindHurwitz, static_cast<std::uint64_t>(table.limit), payload);
}

arith::FactorTable load_factor_table(const std::string& path) {
  std::uint64_t limit = 0;
  std::string payload = load_table_file(path, kKindFactor, &limit);
  arith::FactorTable t;
  t.limit = static_cast<long long>(limit);
  t.spf.resize(static_cast<size_t>(limit) + 1);
  size_t pos = 0;
  for (auto& v : t.spf) v = get_le<std::uint32_t>(payload, pos);
  return t;
}

quadforms::HurwitzTable load_hurwitz_table(const std::string& path) {
  std::uint64_t limit = 0;
  std::string payload = load_table_file(path, kKindHurwitz, &limit);
  quadforms::HurwitzTable t;
  t.limit = static_cast<long long>(limit);
  t.num12.resize(static_cast<size_t>(limit) + 1);
  size_t pos = 0;
  for (auto& v : t.num12) {
    std::int64_t wide = static_cast<std::int64_t>(get_le<std::uint64_t>(payload, pos));
    v = static_cast<std::int32_t>(wide);
    if (v != wide) throw format_error("hurwitz cache entry out of 32-bit range");
  }
  return t;
}

}  // namespace murmur::ingest
