#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pfml/errors.hpp"
#include "pfml/rational.hpp"

using namespace pfml;

TEST_CASE("parsing and canonical form") {
  CHECK(Rat::parse("3/10").str() == "3/10");
  CHECK(Rat::parse("2/4").str() == "1/2");
  CHECK(Rat::parse("1").str() == "1");
  CHECK(Rat::parse("0").str() == "0");
  CHECK(Rat::parse("7/5").str() == "7/5");
  CHECK(Rat::parse("-1/2").str() == "-1/2");
  CHECK(Rat::parse("4/2").str() == "2");
  CHECK_THROWS_AS(Rat::parse("1/0"), SyntaxError);
  CHECK_THROWS_AS(Rat::parse("x"), SyntaxError);
  CHECK_THROWS_AS(Rat::parse("1.5"), SyntaxError);
  CHECK_THROWS_AS(Rat::parse(""), SyntaxError);
}

TEST_CASE("arithmetic is exact") {
  Rat half(1, 2), third(1, 3);
  CHECK((half + third).str() == "5/6");
  CHECK((half - third).str() == "1/6");
  CHECK((half * third).str() == "1/6");
  CHECK((half / third).str() == "3/2");
  CHECK((-half).str() == "-1/2");
  // 1/10 chains that would all break under binary floating point
  Rat tenth(1, 10), acc(0);
  for (int i = 0; i < 10; ++i) acc += tenth;
  CHECK(acc == Rat(1));
}

TEST_CASE("comparisons and unit interval") {
  CHECK(Rat(1, 3) < Rat(1, 2));
  CHECK(Rat(2, 4) == Rat(1, 2));
  CHECK(Rat(1, 2).in_unit());
  CHECK(Rat(0).in_unit());
  CHECK(Rat(1).in_unit());
  CHECK(!Rat(7, 5).in_unit());
  CHECK(!Rat(-1, 5).in_unit());
}

TEST_CASE("truncated arithmetic") {
  CHECK(truncated_sub(Rat(3, 10), Rat(1, 2)) == Rat(0));
  CHECK(truncated_sub(Rat(1), Rat(1, 2)) == Rat(1, 2));
  CHECK(truncated_add(Rat(3, 4), Rat(1, 2)) == Rat(1));
  CHECK(truncated_add(Rat(1, 4), Rat(1, 2)) == Rat(3, 4));
  CHECK(abs_diff(Rat(3, 10), Rat(1)) == Rat(7, 10));
  CHECK(rat_min(Rat(1, 3), Rat(1, 2)) == Rat(1, 3));
  CHECK(rat_max(Rat(1, 3), Rat(1, 2)) == Rat(1, 2));
}

TEST_CASE("zero denominator is rejected") {
  CHECK_THROWS_AS(Rat(1, 0), Error);
}
