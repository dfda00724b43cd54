#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "murmur/arith.hpp"
#include "murmur/quadforms.hpp"

namespace murmur::ingest {

struct NewformRecord {
  long long level = 0;
  int weight = 0;
  std::string orbit_label;
  long long orbit_dim = 0;
  int global_root = 0;                                      // +1 or -1
  std::vector<std::pair<long long, int>> al_eigenvalues;    // (q, lambda_q), q | level
  std::vector<long long> ap_traces;                         // one per prime <= pmax

  // lambda at q, or throws if q is not a level prime
  int al_at(long long q) const;
};

struct CurveRecord {
  long long conductor = 0;
  std::string label;
  std::array<long long, 5> a_invariants{};  // a1, a2, a3, a4, a6
  int global_root = 0;
};

enum class DataKind { Newforms, Curves };

struct Dataset {
  DataKind kind = DataKind::Newforms;
  long long pmax = 0;               // newforms: largest tabulated prime
  std::vector<long long> primes;    // newforms: primes 2..pmax in order
  std::vector<NewformRecord> newforms;
  std::vector<CurveRecord> curves;

  // index of p in `primes`, or -1
  long long prime_index(long long p) const;
};

// Newform table, one orbit per row:
//   #murmur-newforms v1 pmax=<P>
//   level,weight,orbit_label,orbit_dim,root,al_list,ap_list
// al_list entries are q:+-1 joined by ';', ap_list is ';'-joined integers
// for the primes 2..P.  Validation failures carry the offending line.
Dataset parse_newforms(const std::string& path);

// Curve table:
//   #murmur-curves v1
//   conductor label a1 a2 a3 a4 a6 root
Dataset parse_curves(const std::string& path);

// parse <-> serialize round-trips exactly
std::string serialize_newforms(const Dataset& ds);
std::string serialize_curves(const Dataset& ds);

// a_p for a good prime p by counting points: a_p = -sum_x chi_p(f(x))
// with the completed-square quartic f for p > 2, direct enumeration for
// p = 2.  Bad primes (p | conductor) are a domain error.  Intended for
// p up to around 10^4; the cost is linear in p per curve.
long long curve_ap(const CurveRecord& curve, long long p);

// c4/c6-style discriminant of the Weierstrass model (nonzero iff smooth)
i128 curve_discriminant(const CurveRecord& curve);

// ---------------------------------------------------------------------
// Binary table cache.  Little-endian:
//   magic "MURM" | u32 version=1 | u8 kind (1 factor, 2 hurwitz) |
//   u64 limit | payload | u64 FNV-1a of payload bytes
// Factor payload: u32 spf entries; Hurwitz payload: i64 num12 entries.
// Magic/version/kind problems are format errors, short files truncation
// errors, digest mismatches checksum errors.
// ---------------------------------------------------------------------

void save_factor_table(const std::string& path, const arith::FactorTable& table);
void save_hurwitz_table(const std::string& path, const quadforms::HurwitzTable& table);
arith::FactorTable load_factor_table(const std::string& path);
quadforms::HurwitzTable load_hurwitz_table(const std::string& path);

std::uint64_t fnv1a64(const void* data, size_t len);
std::uint64_t fnv1a64_file(const std::string& path);

}  // namespace murmur::ingest
