#pragma once

#include <gmpxx.h>

#include <iosfwd>
#include <string>
#include <string_view>

namespace pfml {

// Exact rational number. All truth values, probabilities and distances in the
// workbench are of this type; there is no floating point anywhere in the core.
// The value is kept canonical (gcd-reduced, positive denominator) at all times.
class Rat {
 public:
  Rat() : v_(0) {}
  Rat(long n) : v_(n) {}  // NOLINT: implicit by design, mirrors integer literals
  Rat(long num, unsigned long den);
  explicit Rat(mpq_class v) : v_(std::move(v)) { v_.canonicalize(); }

  // Accepts "p/q" (q > 0 after sign normalization) or a plain integer string.
  static Rat parse(std::string_view text);

  // Canonical form: integer string when the denominator is 1, else "p/q".
  std::string str() const;

  std::string numerator_str() const { return v_.get_num().get_str(); }
  std::string denominator_str() const { return v_.get_den().get_str(); }

  bool in_unit() const { return sgn(v_) >= 0 && v_ <= 1; }
  bool is_zero() const { return sgn(v_) == 0; }
  bool is_one() const { return v_ == 1; }

  Rat operator+(const Rat& o) const { return Rat(mpq_class(v_ + o.v_)); }
  Rat operator-(const Rat& o) const { return Rat(mpq_class(v_ - o.v_)); }
  Rat operator*(const Rat& o) const { return Rat(mpq_class(v_ * o.v_)); }
  Rat operator/(const Rat& o) const { return Rat(mpq_class(v_ / o.v_)); }
  Rat operator-() const { return Rat(mpq_class(-v_)); }

  Rat& operator+=(const Rat& o) { v_ += o.v_; return *this; }
  Rat& operator-=(const Rat& o) { v_ -= o.v_; return *this; }
  Rat& operator*=(const Rat& o) { v_ *= o.v_; return *this; }
  Rat& operator/=(const Rat& o) { v_ /= o.v_; return *this; }

  friend bool operator==(const Rat& a, const Rat& b) { return a.v_ == b.v_; }
  friend bool operator!=(const Rat& a, const Rat& b) { return a.v_ != b.v_; }
  friend bool operator<(const Rat& a, const Rat& b) { return a.v_ < b.v_; }
  friend bool operator<=(const Rat& a, const Rat& b) { return a.v_ <= b.v_; }
  friend bool operator>(const Rat& a, const Rat& b) { return a.v_ > b.v_; }
  friend bool operator>=(const Rat& a, const Rat& b) { return a.v_ >= b.v_; }

  int sign() const { return sgn(v_); }
  const mpq_class& raw() const { return v_; }

 private:
  mpq_class v_;
};

std::ostream& operator<<(std::ostream& os, const Rat& r);

inline Rat rat_abs(const Rat& x) { return x.sign() < 0 ? -x : x; }
inline const Rat& rat_min(const Rat& a, const Rat& b) { return b < a ? b : a; }
inline const Rat& rat_max(const Rat& a, const Rat& b) { return a < b ? b : a; }
inline Rat abs_diff(const Rat& a, const Rat& b) { return rat_abs(a - b); }

// Zadeh truncated arithmetic on [0,1].
inline Rat truncated_sub(const Rat& x, const Rat& q) {
  Rat d = x - q;
  return d.sign() < 0 ? Rat(0) : d;
}
inline Rat truncated_add(const Rat& x, const Rat& q) {
  Rat s = x + q;
  return s > Rat(1) ? Rat(1) : s;
}

}  // namespace pfml
