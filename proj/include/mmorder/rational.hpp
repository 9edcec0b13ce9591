#pragma once

// Arbitrary-precision signed integers and reduced rationals.
// These back the exact numeric mode: order decisions, orthant counting and
// distance matrix measures are computed in Rational so that equality and
// domination tests carry no floating-point slack.

#include <Eigen/Core>

#include <cmath>
#include <compare>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mmorder {

class BigInt {
public:
  BigInt() = default;

  BigInt(long long v) {
    if (v == 0) return;
    sign_ = v < 0 ? -1 : 1;
    // Avoid overflow on LLONG_MIN by working in unsigned space.
    unsigned long long m = v < 0 ? ~static_cast<unsigned long long>(v) + 1ull
                                 : static_cast<unsigned long long>(v);
    while (m != 0) {
      limbs_.push_back(static_cast<std::uint32_t>(m & 0xffffffffull));
      m >>= 32;
    }
  }

  BigInt(int v) : BigInt(static_cast<long long>(v)) {}

  static BigInt from_decimal(std::string_view s) {
    if (s.empty()) throw std::invalid_argument("empty integer literal");
    int sign = 1;
    std::size_t i = 0;
    if (s[0] == '+' || s[0] == '-') {
      sign = s[0] == '-' ? -1 : 1;
      i = 1;
    }
    if (i == s.size()) throw std::invalid_argument("sign without digits");
    BigInt out;
    const BigInt chunk_base(1000000000ll);
    // Leading digit group may be short; the rest come in groups of 9.
    std::size_t group = (s.size() - i) % 9;
    if (group == 0) group = 9;
    while (i < s.size()) {
      std::uint32_t acc = 0;
      for (std::size_t k = 0; k < group; ++k, ++i) {
        char c = s[i];
        if (c < '0' || c > '9') throw std::invalid_argument("bad digit in integer literal");
        acc = acc * 10 + static_cast<std::uint32_t>(c - '0');
      }
      out = out * chunk_base + BigInt(static_cast<long long>(acc));
      group = 9;
    }
    if (sign < 0) out.sign_ = -out.sign_;
    return out;
  }

  int sign() const { return sign_; }
  bool is_zero() const { return sign_ == 0; }

  bool fits_i64() const {
    if (limbs_.size() > 2) return false;
    unsigned long long m = magnitude_u64();
    if (sign_ >= 0) return m <= 0x7fffffffffffffffull;
    return m <= 0x8000000000000000ull;
  }

  long long to_i64() const {
    unsigned long long m = magnitude_u64();
    return sign_ < 0 ? -static_cast<long long>(m) : static_cast<long long>(m);
  }

  double to_double() const {
    long bits = bit_length();
    if (bits <= 1000) {
      double d = 0.0;
      for (std::size_t i = limbs_.size(); i-- > 0;) d = d * 4294967296.0 + limbs_[i];
      return sign_ < 0 ? -d : d;
    }
    // Too wide for a plain fold; use the top bits with an explicit exponent.
    BigInt top = shifted_right(bits - 64);
    return std::ldexp(top.to_double(), static_cast<int>(bits - 64));
  }

  long bit_length() const {
    if (is_zero()) return 0;
    std::uint32_t hi = limbs_.back();
    long l = static_cast<long>(limbs_.size() - 1) * 32;
    while (hi != 0) {
      ++l;
      hi >>= 1;
    }
    return l;
  }

  BigInt operator-() const {
    BigInt r = *this;
    r.sign_ = -r.sign_;
    return r;
  }

  BigInt abs() const {
    BigInt r = *this;
    if (r.sign_ < 0) r.sign_ = 1;
    return r;
  }

  friend BigInt operator+(const BigInt& a, const BigInt& b) {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    BigInt r;
    if (a.sign_ == b.sign_) {
      r.limbs_ = add_mag(a.limbs_, b.limbs_);
      r.sign_ = a.sign_;
      return r;
    }
    int c = cmp_mag(a.limbs_, b.limbs_);
    if (c == 0) return BigInt();
    if (c > 0) {
      r.limbs_ = sub_mag(a.limbs_, b.limbs_);
      r.sign_ = a.sign_;
    } else {
      r.limbs_ = sub_mag(b.limbs_, a.limbs_);
      r.sign_ = b.sign_;
    }
    return r;
  }

  friend BigInt operator-(const BigInt& a, const BigInt& b) { return a + (-b); }

  friend BigInt operator*(const BigInt& a, const BigInt& b) {
    if (a.is_zero() || b.is_zero()) return BigInt();
    BigInt r;
    r.sign_ = a.sign_ * b.sign_;
    r.limbs_.assign(a.limbs_.size() + b.limbs_.size(), 0);
    for (std::size_t i = 0; i < a.limbs_.size(); ++i) {
      std::uint64_t carry = 0;
      for (std::size_t j = 0; j < b.limbs_.size(); ++j) {
        std::uint64_t cur = static_cast<std::uint64_t>(a.limbs_[i]) * b.limbs_[j] +
                            r.limbs_[i + j] + carry;
        r.limbs_[i + j] = static_cast<std::uint32_t>(cur & 0xffffffffull);
        carry = cur >> 32;
      }
      std::size_t k = i + b.limbs_.size();
      while (carry != 0) {
        std::uint64_t cur = r.limbs_[k] + carry;
        r.limbs_[k] = static_cast<std::uint32_t>(cur & 0xffffffffull);
        carry = cur >> 32;
        ++k;
      }
    }
    r.trim();
    return r;
  }

  // Truncated division: quotient rounds toward zero, remainder has the
  // dividend's sign. Division by zero throws.
  static void divmod(const BigInt& a, const BigInt& b, BigInt& q, BigInt& r) {
    if (b.is_zero()) throw std::domain_error("BigInt division by zero");
    if (cmp_mag(a.limbs_, b.limbs_) < 0) {
      q = BigInt();
      r = a;
      return;
    }
    std::vector<std::uint32_t> quot, rem;
    if (b.limbs_.size() == 1) {
      divmod_small(a.limbs_, b.limbs_[0], quot, rem);
    } else {
      divmod_mag(a.limbs_, b.limbs_, quot, rem);
    }
    q = BigInt();
    q.limbs_ = std::move(quot);
    q.trim();
    q.sign_ = q.limbs_.empty() ? 0 : a.sign_ * b.sign_;
    r = BigInt();
    r.limbs_ = std::move(rem);
    r.trim();
    r.sign_ = r.limbs_.empty() ? 0 : a.sign_;
  }

  friend BigInt operator/(const BigInt& a, const BigInt& b) {
    BigInt q, r;
    divmod(a, b, q, r);
    return q;
  }

  friend BigInt operator%(const BigInt& a, const BigInt& b) {
    BigInt q, r;
    divmod(a, b, q, r);
    return r;
  }

  friend bool operator==(const BigInt& a, const BigInt& b) {
    return a.sign_ == b.sign_ && a.limbs_ == b.limbs_;
  }

  friend std::strong_ordering operator<=>(const BigInt& a, const BigInt& b) {
    if (a.sign_ != b.sign_) return a.sign_ <=> b.sign_;
    int c = cmp_mag(a.limbs_, b.limbs_) * (a.sign_ >= 0 ? 1 : -1);
    return c <=> 0;
  }

  static BigInt gcd(BigInt a, BigInt b) {
    a.sign_ = a.is_zero() ? 0 : 1;
    b.sign_ = b.is_zero() ? 0 : 1;
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    if (a.fits_i64() && b.fits_i64())
      return BigInt(std::gcd(a.to_i64(), b.to_i64()));
    // Binary GCD; magnitudes only.
    long sa = a.trailing_zero_bits(), sb = b.trailing_zero_bits();
    long shift = std::min(sa, sb);
    a = a.shifted_right(sa);
    b = b.shifted_right(sb);
    while (true) {
      if (cmp_mag(a.limbs_, b.limbs_) < 0) std::swap(a, b);
      a = a - b;
      if (a.is_zero()) break;
      a = a.shifted_right(a.trailing_zero_bits());
      if (a.fits_i64() && b.fits_i64()) {
        BigInt g(std::gcd(a.to_i64(), b.to_i64()));
        return g.shifted_left(shift);
      }
    }
    return b.shifted_left(shift);
  }

  std::string to_string() const {
    if (is_zero()) return "0";
    std::vector<std::uint32_t> mag = limbs_;
    std::string out;
    while (!mag.empty()) {
      std::uint64_t rem = 0;
      for (std::size_t i = mag.size(); i-- > 0;) {
        std::uint64_t cur = (rem << 32) | mag[i];
        mag[i] = static_cast<std::uint32_t>(cur / 1000000000ull);
        rem = cur % 1000000000ull;
      }
      while (!mag.empty() && mag.back() == 0) mag.pop_back();
      char buf[16];
      if (mag.empty())
        std::snprintf(buf, sizeof buf, "%llu", static_cast<unsigned long long>(rem));
      else
        std::snprintf(buf, sizeof buf, "%09llu", static_cast<unsigned long long>(rem));
      out.insert(0, buf);
    }
    if (sign_ < 0) out.insert(0, "-");
    return out;
  }

  static BigInt pow(const BigInt& base, unsigned exp) {
    BigInt result(1ll), b = base;
    while (exp != 0) {
      if (exp & 1u) result = result * b;
      exp >>= 1;
      if (exp != 0) b = b * b;
    }
    return result;
  }

private:
  int sign_ = 0;                      // -1, 0, +1
  std::vector<std::uint32_t> limbs_;  // little-endian base 2^32, no high zeros

  void trim() {
    while (!limbs_.empty() && limbs_.back() == 0) limbs_.pop_back();
    if (limbs_.empty()) sign_ = 0;
  }

  unsigned long long magnitude_u64() const {
    unsigned long long m = 0;
    if (limbs_.size() >= 2) m = static_cast<unsigned long long>(limbs_[1]) << 32;
    if (!limbs_.empty()) m |= limbs_[0];
    return m;
  }

  long trailing_zero_bits() const {
    if (is_zero()) return 0;
    long bits = 0;
    for (std::size_t i = 0; i < limbs_.size(); ++i) {
      if (limbs_[i] == 0) {
        bits += 32;
        continue;
      }
      std::uint32_t v = limbs_[i];
      while ((v & 1u) == 0) {
        ++bits;
        v >>= 1;
      }
      break;
    }
    return bits;
  }

  BigInt shifted_left(long bits) const {
    if (is_zero() || bits == 0) return *this;
    BigInt r;
    r.sign_ = sign_;
    long words = bits / 32, rem = bits % 32;
    r.limbs_.assign(limbs_.size() + words + 1, 0);
    for (std::size_t i = 0; i < limbs_.size(); ++i) {
      std::uint64_t cur = static_cast<std::uint64_t>(limbs_[i]) << rem;
      r.limbs_[i + words] |= static_cast<std::uint32_t>(cur & 0xffffffffull);
      r.limbs_[i + words + 1] |= static_cast<std::uint32_t>(cur >> 32);
    }
    r.trim();
    return r;
  }

  BigInt shifted_right(long bits) const {
    if (is_zero() || bits == 0) return *this;
    long words = bits / 32, rem = bits % 32;
    if (words >= static_cast<long>(limbs_.size())) return BigInt();
    BigInt r;
    r.sign_ = sign_;
    r.limbs_.assign(limbs_.size() - words, 0);
    for (std::size_t i = 0; i < r.limbs_.size(); ++i) {
      std::uint64_t cur = limbs_[i + words] >> rem;
      if (rem != 0 && i + words + 1 < limbs_.size())
        cur |= static_cast<std::uint64_t>(limbs_[i + words + 1]) << (32 - rem);
      r.limbs_[i] = static_cast<std::uint32_t>(cur & 0xffffffffull);
    }
    r.trim();
    return r;
  }

  static int cmp_mag(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b) {
    if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
    for (std::size_t i = a.size(); i-- > 0;)
      if (a[i] != b[i]) return a[i] < b[i] ? -1 : 1;
    return 0;
  }

  static std::vector<std::uint32_t> add_mag(const std::vector<std::uint32_t>& a,
                                            const std::vector<std::uint32_t>& b) {
    const auto &big = a.size() >= b.size() ? a : b, &small = a.size() >= b.size() ? b : a;
    std::vector<std::uint32_t> r = big;
    std::uint64_t carry = 0;
    for (std::size_t i = 0; i < r.size(); ++i) {
      std::uint64_t cur = static_cast<std::uint64_t>(r[i]) + carry +
                          (i < small.size() ? small[i] : 0);
      r[i] = static_cast<std::uint32_t>(cur & 0xffffffffull);
      carry = cur >> 32;
      if (carry == 0 && i >= small.size()) break;
    }
    if (carry != 0) r.push_back(static_cast<std::uint32_t>(carry));
    return r;
  }

  // Requires |a| >= |b|.
  static std::vector<std::uint32_t> sub_mag(const std::vector<std::uint32_t>& a,
                                            const std::vector<std::uint32_t>& b) {
    std::vector<std::uint32_t> r = a;
    std::int64_t borrow = 0;
    for (std::size_t i = 0; i < r.size(); ++i) {
      std::int64_t cur = static_cast<std::int64_t>(r[i]) - borrow -
                         (i < b.size() ? static_cast<std::int64_t>(b[i]) : 0);
      borrow = 0;
      if (cur < 0) {
        cur += 1ll << 32;
        borrow = 1;
      }
      r[i] = static_cast<std::uint32_t>(cur);
      if (borrow == 0 && i >= b.size()) break;
    }
    while (!r.empty() && r.back() == 0) r.pop_back();
    return r;
  }

  static void divmod_small(const std::vector<std::uint32_t>& a, std::uint32_t b,
                           std::vector<std::uint32_t>& q, std::vector<std::uint32_t>& r) {
    q.assign(a.size(), 0);
    std::uint64_t rem = 0;
    for (std::size_t i = a.size(); i-- > 0;) {
      std::uint64_t cur = (rem << 32) | a[i];
      q[i] = static_cast<std::uint32_t>(cur / b);
      rem = cur % b;
    }
    r.clear();
    if (rem != 0) r.push_back(static_cast<std::uint32_t>(rem));
  }

  // Bitwise long division on magnitudes; quadratic but exercised only on
  // values a few hundred bits wide.
  static void divmod_mag(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b,
                         std::vector<std::uint32_t>& q, std::vector<std::uint32_t>& r) {
    BigInt av, bv;
    av.limbs_ = a;
    av.sign_ = 1;
    bv.limbs_ = b;
    bv.sign_ = 1;
    long bits = av.bit_length();
    BigInt rem, quot;
    quot.limbs_.assign(a.size(), 0);
    quot.sign_ = 1;
    for (long i = bits - 1; i >= 0; --i) {
      rem = rem.shifted_left(1);
      if ((a[i / 32] >> (i % 32)) & 1u) {
        if (rem.is_zero()) {
          rem.sign_ = 1;
          rem.limbs_.push_back(1);
        } else {
          rem.limbs_[0] |= 1u;
        }
      }
      if (cmp_mag(rem.limbs_, bv.limbs_) >= 0) {
        rem = rem - bv;
        quot.limbs_[i / 32] |= 1u << (i % 32);
      }
    }
    quot.trim();
    rem.trim();
    q = std::move(quot.limbs_);
    r = std::move(rem.limbs_);
  }
};

class Rational {
public:
  Rational() : num_(0ll), den_(1ll) {}
  Rational(long long v) : num_(v), den_(1ll) {}
  Rational(int v) : num_(static_cast<long long>(v)), den_(1ll) {}

  Rational(long long num, long long den) : num_(num), den_(den) { normalize(); }

  Rational(BigInt num, BigInt den) : num_(std::move(num)), den_(std::move(den)) { normalize(); }

  // Accepts "p", "-p" and "p/q". Anything else (including decimals) throws;
  // decimal literals belong to float mode.
  static Rational parse(std::string_view s) {
    auto slash = s.find('/');
    if (slash == std::string_view::npos) return Rational(BigInt::from_decimal(s), BigInt(1ll));
    return Rational(BigInt::from_decimal(s.substr(0, slash)),
                    BigInt::from_decimal(s.substr(slash + 1)));
  }

  const BigInt& num() const { return num_; }
  const BigInt& den() const { return den_; }
  int sign() const { return num_.sign(); }
  bool is_zero() const { return num_.is_zero(); }
  bool is_integer() const { return den_ == BigInt(1ll); }

  double to_double() const { return num_.to_double() / den_.to_double(); }

  std::string to_string() const {
    if (is_integer()) return num_.to_string();
    return num_.to_string() + "/" + den_.to_string();
  }

  friend Rational operator+(const Rational& a, const Rational& b) {
    return Rational(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
  }
  friend Rational operator-(const Rational& a, const Rational& b) {
    return Rational(a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_);
  }
  friend Rational operator*(const Rational& a, const Rational& b) {
    return Rational(a.num_ * b.num_, a.den_ * b.den_);
  }
  friend Rational operator/(const Rational& a, const Rational& b) {
    if (b.is_zero()) throw std::domain_error("Rational division by zero");
    return Rational(a.num_ * b.den_, a.den_ * b.num_);
  }
  Rational operator-() const {
    Rational r = *this;
    r.num_ = -r.num_;
    return r;
  }
  Rational& operator+=(const Rational& o) { return *this = *this + o; }
  Rational& operator-=(const Rational& o) { return *this = *this - o; }
  Rational& operator*=(const Rational& o) { return *this = *this * o; }
  Rational& operator/=(const Rational& o) { return *this = *this / o; }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    return (a.num_ * b.den_) <=> (b.num_ * a.den_);
  }

  static Rational pow(const Rational& base, unsigned exp) {
    return Rational(BigInt::pow(base.num_, exp), BigInt::pow(base.den_, exp));
  }

  Rational abs() const { return sign() < 0 ? -*this : *this; }

private:
  BigInt num_, den_;  // den_ > 0, gcd(|num_|, den_) = 1, zero stored as 0/1

  void normalize() {
    if (den_.is_zero()) throw std::domain_error("Rational with zero denominator");
    if (den_.sign() < 0) {
      num_ = -num_;
      den_ = -den_;
    }
    if (num_.is_zero()) {
      den_ = BigInt(1ll);
      return;
    }
    BigInt g = BigInt::gcd(num_, den_);
    if (g != BigInt(1ll)) {
      num_ = num_ / g;
      den_ = den_ / g;
    }
  }
};

inline Rational abs(const Rational& r) { return r.abs(); }

}  // namespace mmorder

namespace Eigen {

template <>
struct NumTraits<mmorder::Rational> {
  using Real = mmorder::Rational;
  using NonInteger = mmorder::Rational;
  using Literal = mmorder::Rational;
  using Nested = mmorder::Rational;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 8,
    AddCost = 100,
    MulCost = 100
  };
  static inline Real epsilon() { return Real(); }
  static inline Real dummy_precision() { return Real(); }
  static inline int digits10() { return 0; }
};

}  // namespace Eigen
