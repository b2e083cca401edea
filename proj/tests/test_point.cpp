#include <doctest.h>

#include "difflang/parser.hpp"
#include "difflang/point.hpp"

using namespace difflang;

TEST_CASE("point parser handles scalars, arrays and whitespace") {
  std::vector<PointValue> v = parse_point(" x = 1.5 , p = [1, 2e0, -3.25], n=4");
  REQUIRE(v.size() == 3);
  CHECK(v[0].name == "x");
  CHECK(!v[0].is_array);
  CHECK(v[0].scalar == 1.5);
  CHECK(v[1].is_array);
  CHECK(v[1].array == std::vector<double>{1.0, 2.0, -3.25});
  CHECK(v[2].scalar == 4.0);
}

TEST_CASE("empty point and empty array") {
  CHECK(parse_point("").empty());
  std::vector<PointValue> v = parse_point("p=[]");
  REQUIRE(v.size() == 1);
  CHECK(v[0].is_array);
  CHECK(v[0].array.empty());
}

TEST_CASE("point syntax errors carry an offset") {
  CHECK_THROWS_AS(parse_point("x="), DlError);
  CHECK_THROWS_AS(parse_point("x=1,"), DlError);
  CHECK_THROWS_AS(parse_point("=1"), DlError);
  CHECK_THROWS_AS(parse_point("p=[1,2"), DlError);
}

TEST_CASE("bind_point fills defaults and checks types") {
  Program p = parse(
      "double f(double* a, double s, int n, double d = 2.0) {"
      " return a[0] * s + d + n; }");
  const FuncDef& f = p.functions[0];

  std::vector<Value> args = bind_point(f, parse_point("a=[1,2],s=3,n=2"));
  REQUIRE(args.size() == 4);
  CHECK(args[1].as_double() == 3.0);
  CHECK(args[2].as_int() == 2);
  CHECK(args[3].as_double() == 2.0);  // default

  // unknown name
  CHECK_THROWS_AS(bind_point(f, parse_point("z=1")), DlError);
  // missing non-defaulted parameter
  CHECK_THROWS_AS(bind_point(f, parse_point("a=[1],s=1")), DlError);
  // scalar where an array is needed, and vice versa
  CHECK_THROWS_AS(bind_point(f, parse_point("a=1,s=1,n=1")), DlError);
  CHECK_THROWS_AS(bind_point(f, parse_point("a=[1],s=[2],n=1")), DlError);
  // non-integer for an int parameter
  CHECK_THROWS_AS(bind_point(f, parse_point("a=[1],s=1,n=1.5")), DlError);
}
