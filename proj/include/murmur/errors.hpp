#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace murmur {

// Error taxonomy.  The CLI maps these onto exit codes: validation and
// domain problems exit 2, resource exhaustion exits 3, an unresolved
// xi branch exits 4.  Internal consistency failures (a trace that does
// not come out integral) throw std::logic_error and are never caught.

struct domain_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct resource_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct validation_error : std::runtime_error {
  long line;
  explicit validation_error(const std::string& msg, long line_no = 0)
      : std::runtime_error(line_no > 0 ? "line " + std::to_string(line_no) + ": " + msg
                                       : msg),
        line(line_no) {}
};

// Table cache failures, kept distinct so callers can tell a wrong file
// from a damaged one.
struct format_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct truncation_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct checksum_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One elliptic term whose local factor at q could not be evaluated:
// q divides the level, q^2 divides delta, and the active policy has no
// value for that branch.
struct XiTerm {
  long long s = 0;      // trace-sum index that produced delta (0 when unknown)
  long long delta = 0;  // discriminant argument
  long long q = 0;      // level prime with q^2 | delta
};

struct unresolved_xi_error : std::runtime_error {
  std::vector<XiTerm> terms;
  explicit unresolved_xi_error(std::vector<XiTerm> t)
      : std::runtime_error("unresolved xi factor at " + std::to_string(t.size()) +
                           " term(s); first (delta=" +
                           std::to_string(t.empty() ? 0 : t.front().delta) + ", q=" +
                           std::to_string(t.empty() ? 0 : t.front().q) + ")"),
        terms(std::move(t)) {}
};

}  // namespace murmur
