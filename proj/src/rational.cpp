// Copyright 2026 The forestsched Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "forestsched/rational.hpp"

#include <charconv>
#include <limits>
#include <numeric>
#include <ostream>

#include "forestsched/error.hpp"

namespace forestsched {

namespace {

using Wide = __int128;

constexpr Wide kMax = std::numeric_limits<std::int64_t>::max();

std::int64_t narrow(Wide v, const char* what) {
  if (v > kMax || v < -kMax) {
    throw Error(ErrorCode::Overflow, std::string("rational ") + what +
                                         " exceeds the 64-bit budget");
  }
  return static_cast<std::int64_t>(v);
}

Wide wide_gcd(Wide a, Wide b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    Wide t = a % b;
    a = b;
    b = t;
  }
  return a;
}

}  // namespace

Rational make_reduced_rational(Wide num, Wide den, const char* what) {
  if (den == 0) {
    throw Error(ErrorCode::PreconditionViolation, "division by zero");
  }
  if (den < 0) {
    num = -num;
    den = -den;
  }
  Wide g = wide_gcd(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  return Rational(narrow(num, what), narrow(den, what), Rational::Reduced{});
}

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedJson: return "MalformedJson";
    case ErrorCode::UnknownNodeKind: return "UnknownNodeKind";
    case ErrorCode::NonIntegerBandwidth: return "NonIntegerBandwidth";
    case ErrorCode::DuplicateNodeId: return "DuplicateNodeId";
    case ErrorCode::UnknownNode: return "UnknownNode";
    case ErrorCode::InvalidLink: return "InvalidLink";
    case ErrorCode::InvalidTopology: return "InvalidTopology";
    case ErrorCode::NonIntegralScale: return "NonIntegralScale";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::UnsupportedFamily: return "UnsupportedFamily";
    case ErrorCode::InvalidGeneratorSpec: return "InvalidGeneratorSpec";
    case ErrorCode::VertexNotInGraph: return "VertexNotInGraph";
    case ErrorCode::PreconditionViolation: return "PreconditionViolation";
    case ErrorCode::NoFraction: return "NoFraction";
    case ErrorCode::NotEulerianAfterFloor: return "NotEulerianAfterFloor";
    case ErrorCode::StuckSplit: return "StuckSplit";
    case ErrorCode::CapacityExhausted: return "CapacityExhausted";
    case ErrorCode::NoAddableEdge: return "NoAddableEdge";
    case ErrorCode::MismatchedForest: return "MismatchedForest";
    case ErrorCode::MalformedSchedule: return "MalformedSchedule";
    case ErrorCode::TooLarge: return "TooLarge";
  }
  return "Unknown";
}

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  return narrow(static_cast<Wide>(a) + b, "sum");
}

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  return narrow(static_cast<Wide>(a) * b, "product");
}

Rational::Rational(std::int64_t num, std::int64_t den) {
  *this = make_reduced_rational(num, den, "construction");
}

std::int64_t Rational::floor() const {
  std::int64_t q = num_ / den_;
  if (num_ % den_ != 0 && num_ < 0) --q;
  return q;
}

std::int64_t Rational::ceil() const {
  std::int64_t q = num_ / den_;
  if (num_ % den_ != 0 && num_ > 0) ++q;
  return q;
}

Rational Rational::reciprocal() const {
  return make_reduced_rational(den_, num_, "reciprocal");
}

Rational Rational::operator-() const {
  Rational r;
  r.num_ = -num_;
  r.den_ = den_;
  return r;
}

Rational& Rational::operator+=(const Rational& o) {
  Wide g = std::gcd(den_, o.den_);
  Wide num = static_cast<Wide>(num_) * (o.den_ / g) +
             static_cast<Wide>(o.num_) * (den_ / g);
  Wide den = static_cast<Wide>(den_) * (o.den_ / g);
  return *this = make_reduced_rational(num, den, "sum");
}

Rational& Rational::operator-=(const Rational& o) { return *this += -o; }

Rational& Rational::operator*=(const Rational& o) {
  // Cross-reduce first so intermediate products stay small.
  std::int64_t g1 = std::gcd(num_, o.den_);
  std::int64_t g2 = std::gcd(o.num_, den_);
  if (g1 == 0) g1 = 1;
  if (g2 == 0) g2 = 1;
  Wide num = static_cast<Wide>(num_ / g1) * (o.num_ / g2);
  Wide den = static_cast<Wide>(den_ / g2) * (o.den_ / g1);
  return *this = make_reduced_rational(num, den, "product");
}

Rational& Rational::operator/=(const Rational& o) {
  return *this *= o.reciprocal();
}

std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
  Wide lhs = static_cast<Wide>(a.num_) * b.den_;
  Wide rhs = static_cast<Wide>(b.num_) * a.den_;
  if (lhs < rhs) return std::strong_ordering::less;
  if (lhs > rhs) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

std::string Rational::str() const {
  return std::to_string(num_) + "/" + std::to_string(den_);
}

Rational Rational::parse(std::string_view text) {
  auto parse_int = [&](std::string_view part) {
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (ec != std::errc() || ptr != part.data() + part.size() || part.empty()) {
      throw Error(ErrorCode::MalformedSchedule,
                  "cannot parse rational '" + std::string(text) + "'");
    }
    return v;
  };
  auto slash = text.find('/');
  if (slash == std::string_view::npos) return Rational(parse_int(text));
  std::int64_t den = parse_int(text.substr(slash + 1));
  if (den == 0) {
    throw Error(ErrorCode::MalformedSchedule,
                "zero denominator in '" + std::string(text) + "'");
  }
  return Rational(parse_int(text.substr(0, slash)), den);
}

std::ostream& operator<<(std::ostream& os, const Rational& r) {
  return os << r.str();
}

Rational simplest_between(const Rational& lo, const Rational& hi) {
  if (lo > hi || lo < Rational(0)) {
    throw Error(ErrorCode::PreconditionViolation,
                "simplest_between needs 0 <= lo <= hi");
  }
  if (lo == hi) return lo;
  std::int64_t c = lo.ceil();
  if (Rational(c) <= hi) return Rational(c);
  // lo and hi share the integer part n and lie strictly inside (n, n+1).
  std::int64_t n = lo.floor();
  Rational inner = simplest_between((hi - Rational(n)).reciprocal(),
                                    (lo - Rational(n)).reciprocal());
  return Rational(n) + inner.reciprocal();
}

}  // namespace forestsched
