#include <doctest.h>

#include <cmath>

#include "sppa/schedules.hpp"

using namespace sppa;

TEST_CASE("constant_index_schedule pinned values") {
  Schedule s = constant_index_schedule(1.0);
  CHECK(s.A(0) == doctest::Approx(0.0));
  CHECK(s.a(0) == doctest::Approx(1.0));
  CHECK(s.b(0) == doctest::Approx(0.0));
  CHECK(s.c(0) == doctest::Approx(2.0));
  CHECK(s.A(3) == doctest::Approx(6.0));
  CHECK(s.a(3) == doctest::Approx(4.0));
  CHECK(s.b(3) == doctest::Approx(1.5));
  CHECK(s.c(3) == doctest::Approx(5.0));
}

TEST_CASE("constant_index_schedule has a constant prox step 2c") {
  for (double c : {1.0, 2.5}) {
    Schedule s = constant_index_schedule(c);
    for (long k = 0; k <= 50; ++k)
      CHECK(s.c(k) / (s.b(k) + 1.0) == doctest::Approx(2.0 * c).epsilon(1e-14));
  }
}

TEST_CASE("rising_factorial_schedule pinned values") {
  Schedule s = rising_factorial_schedule(2);
  CHECK(s.A(0) == doctest::Approx(0.0));
  CHECK(s.a(0) == doctest::Approx(2.0));
  CHECK(s.b(0) == doctest::Approx(0.0));
  CHECK(s.c(0) == doctest::Approx(2.0));
  CHECK(s.A(1) == doctest::Approx(2.0));
  CHECK(s.a(1) == doctest::Approx(4.0));
  CHECK(s.b(1) == doctest::Approx(0.5));
  CHECK(s.c(1) == doctest::Approx(4.0));
}

TEST_CASE("exponential_schedule pinned values") {
  Schedule s = exponential_schedule(2.0);
  CHECK(s.A(0) == doctest::Approx(0.0));
  CHECK(s.a(0) == doctest::Approx(1.0));
  CHECK(s.b(0) == doctest::Approx(0.0));
  CHECK(s.c(0) == doctest::Approx(1.0));
  CHECK(s.A(3) == doctest::Approx(7.0));
  CHECK(s.a(3) == doctest::Approx(8.0));
  CHECK(s.b(3) == doctest::Approx(7.0 / 8.0));
  CHECK(s.c(3) == doctest::Approx(8.0));
}

TEST_CASE("built-in schedules satisfy the increment identity with equality") {
  Schedule cs = constant_index_schedule(1.0);
  Schedule rs = rising_factorial_schedule(2);
  Schedule es = exponential_schedule(2.0);
  Schedule ls = salm_lasso_schedule();
  for (const Schedule* s : {&cs, &rs, &es, &ls}) {
    for (long k = 0; k <= 100; ++k) {
      double inc = s->A(k + 1) - s->A(k);
      CHECK(inc == doctest::Approx(s->a(k)).epsilon(1e-12));
    }
  }
}

TEST_CASE("built-in schedules validate over a long horizon") {
  for (const Schedule& s :
       {constant_index_schedule(1.0), constant_index_schedule(0.3),
        rising_factorial_schedule(2), rising_factorial_schedule(3),
        exponential_schedule(1.5), exponential_schedule(2.0), salm_lasso_schedule()}) {
    ScheduleReport rep = validate(s, 100000);
    CAPTURE(s.name);
    CHECK(rep.valid);
    CHECK(rep.first_violation == -1);
    CHECK(rep.condition.empty());
  }
}

TEST_CASE("salm_lasso_schedule regression fixture") {
  Schedule s = salm_lasso_schedule();
  CHECK(s.a(0) == doctest::Approx(0.25));
  CHECK(s.a(3) == doctest::Approx(1.0));
  CHECK(s.b(4) == doctest::Approx(2.0));
  CHECK(s.c(4) == doctest::Approx(3.0));
  CHECK(s.A(4) == doctest::Approx(2.5));
  ScheduleReport rep = validate(s, 100000);
  CHECK(rep.valid);
  CHECK(rep.first_violation == -1);
}

TEST_CASE("validate flags the counterexample schedules") {
  Schedule bad;
  bad.name = "linear_no_b";
  bad.A = [](long k) { return static_cast<double>(k); };
  bad.a = [](long) { return 1.0; };
  bad.b = [](long) { return 0.0; };
  bad.c = [](long) { return 1.0; };
  ScheduleReport rep = validate(bad, 10);
  CHECK_FALSE(rep.valid);
  CHECK(rep.first_violation == 1);
  CHECK(rep.condition == "A = a b");

  Schedule small_c = constant_index_schedule(1.0);
  Schedule base = constant_index_schedule(1.0);
  small_c.c = [base](long k) { return base.a(k) / 2.0; };
  ScheduleReport rep2 = validate(small_c, 10);
  CHECK_FALSE(rep2.valid);
  CHECK(rep2.first_violation == 0);
  CHECK(rep2.condition == "c >= a");
}

TEST_CASE("schedule constructors reject bad parameters") {
  CHECK_THROWS_AS(constant_index_schedule(0.0), std::invalid_argument);
  CHECK_THROWS_AS(constant_index_schedule(-1.0), std::invalid_argument);
  CHECK_THROWS_AS(rising_factorial_schedule(1), std::invalid_argument);
  CHECK_THROWS_AS(exponential_schedule(1.0), std::invalid_argument);
  CHECK_THROWS_AS(validate(constant_index_schedule(1.0), -1), std::invalid_argument);
}

TEST_CASE("make_schedule dispatches by name") {
  CHECK(make_schedule("constant_index", 2.0).c(0) == doctest::Approx(4.0));
  CHECK(make_schedule("rising_factorial", 3.0).name == "rising_factorial");
  CHECK(make_schedule("exponential", 2.0).A(3) == doctest::Approx(7.0));
  CHECK(make_schedule("salm_lasso", 0.0).a(0) == doctest::Approx(0.25));
  CHECK_THROWS_AS(make_schedule("no_such_schedule", 1.0), std::invalid_argument);
}

TEST_CASE("continuous schedules evaluate and validate") {
  ContinuousSchedule poly = polynomial_continuous_schedule(2.0);
  CHECK(poly.A(1.5) == doctest::Approx(2.25));
  CHECK(poly.a(1.5) == doctest::Approx(3.0));
  CHECK(poly.b(1.5) == doctest::Approx(0.75));
  CHECK(poly.c(1.5) == doctest::Approx(1.5));
  CHECK(poly.dA(1.5) == doctest::Approx(3.0));

  ContinuousSchedule ex = exponential_continuous_schedule(1.0);
  CHECK(ex.A(1.0) == doctest::Approx(std::exp(1.0) - 1.0));
  CHECK(ex.a(1.0) == doctest::Approx(std::exp(1.0)));
  CHECK(ex.b(1.0) == doctest::Approx(1.0 - std::exp(-1.0)));

  CHECK(validate_continuous(poly, 10.0).valid);
  CHECK(validate_continuous(ex, 10.0).valid);

  ContinuousSchedule broken = poly;
  broken.a = [](double t) { return t; };
  ScheduleReport rep = validate_continuous(broken, 10.0);
  CHECK_FALSE(rep.valid);
}
