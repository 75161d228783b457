#include "pfml/rational.hpp"

#include <ostream>

#include "pfml/errors.hpp"

namespace pfml {

Rat::Rat(long num, unsigned long den) : v_(num, den) {
  if (den == 0) throw Error("rational with zero denominator");
  v_.canonicalize();
}

Rat Rat::parse(std::string_view text) {
  auto is_int = [](std::string_view s) {
    if (s.empty()) return false;
    std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
    if (i == s.size()) return false;
    for (; i < s.size(); ++i)
      if (s[i] < '0' || s[i] > '9') return false;
    return true;
  };
  std::size_t slash = text.find('/');
  if (slash == std::string_view::npos) {
    if (!is_int(text))
      throw SyntaxError(0, "rational number, got \"" + std::string(text) + "\"");
    return Rat(mpq_class(mpz_class{std::string(text)}, 1));
  }
  std::string_view num = text.substr(0, slash);
  std::string_view den = text.substr(slash + 1);
  if (!is_int(num) || !is_int(den))
    throw SyntaxError(0, "rational number, got \"" + std::string(text) + "\"");
  mpz_class d{std::string(den)};
  if (sgn(d) == 0)
    throw SyntaxError(slash + 1, "nonzero denominator");
  mpq_class v(mpz_class{std::string(num)}, d);
  v.canonicalize();
  return Rat(std::move(v));
}

std::string Rat::str() const {
  if (v_.get_den() == 1) return v_.get_num().get_str();
  return v_.get_str();
}

std::ostream& operator<<(std::ostream& os, const Rat& r) {
  return os << r.str();
}

}  // namespace pfml
