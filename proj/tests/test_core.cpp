#include "latrack/core.hpp"

#include "helpers.hpp"

#include <doctest.h>

using namespace latrack;
using namespace latrack::testing;

TEST_CASE("corner_to_state converts and validates") {
  const BoundingBox a = corner_to_state(0, 0, 10, 20);
  CHECK(a.u == doctest::Approx(5.0));
  CHECK(a.v == doctest::Approx(10.0));
  CHECK(a.h == doctest::Approx(20.0));
  CHECK(a.r == doctest::Approx(0.5));

  const BoundingBox b = corner_to_state(100, 50, 30, 30);
  CHECK(b.u == doctest::Approx(115.0));
  CHECK(b.v == doctest::Approx(65.0));
  CHECK(b.h == doctest::Approx(30.0));
  CHECK(b.r == doctest::Approx(1.0));

  const BoundingBox c = corner_to_state(3, 7, 14, 35);
  CHECK(c.u == doctest::Approx(10.0));
  CHECK(c.v == doctest::Approx(24.5));
  CHECK(c.h == doctest::Approx(35.0));
  CHECK(c.r == doctest::Approx(0.4));
  const CornerBox back = state_to_corner(c);
  CHECK(back.x == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(back.y == doctest::Approx(7.0).epsilon(1e-12));
  CHECK(back.w == doctest::Approx(14.0).epsilon(1e-12));
  CHECK(back.h == doctest::Approx(35.0).epsilon(1e-12));

  CHECK_THROWS_AS(corner_to_state(0, 0, 0, 5), std::invalid_argument);
  CHECK_THROWS_AS(corner_to_state(0, 0, 5, -1), std::invalid_argument);
}

TEST_CASE("state_to_corner inverts corner_to_state") {
  const CornerBox a = state_to_corner(BoundingBox{5, 10, 20, 0.5});
  CHECK(a.x == doctest::Approx(0.0));
  CHECK(a.y == doctest::Approx(0.0));
  CHECK(a.w == doctest::Approx(10.0));
  CHECK(a.h == doctest::Approx(20.0));

  const CornerBox b = state_to_corner(BoundingBox{0, 0, 2, 1});
  CHECK(b.x == doctest::Approx(-1.0));
  CHECK(b.y == doctest::Approx(-1.0));
  CHECK(b.w == doctest::Approx(2.0));
  CHECK(b.h == doctest::Approx(2.0));

  CHECK_THROWS_AS(state_to_corner(BoundingBox{0, 0, 0, 1}), std::invalid_argument);
}

TEST_CASE("corner/state round-trip over random boxes") {
  auto rng = make_rng(11);
  for (int i = 0; i < 1000; ++i) {
    const double x = uniform(rng, -500, 2000);
    const double y = uniform(rng, -500, 2000);
    const double w = uniform(rng, 1e-3, 400);
    const double h = uniform(rng, 1e-3, 400);
    const CornerBox back = state_to_corner(corner_to_state(x, y, w, h));
    CHECK(std::abs(back.x - x) < 1e-9);
    CHECK(std::abs(back.y - y) < 1e-9);
    CHECK(std::abs(back.w - w) < 1e-9);
    CHECK(std::abs(back.h - h) < 1e-9);

    const BoundingBox box = random_box(rng);
    const CornerBox corner = state_to_corner(box);
    const BoundingBox again = corner_to_state(corner.x, corner.y, corner.w, corner.h);
    CHECK(std::abs(again.u - box.u) < 1e-9);
    CHECK(std::abs(again.v - box.v) < 1e-9);
    CHECK(std::abs(again.h - box.h) < 1e-9);
    CHECK(std::abs(again.r - box.r) < 1e-9);
  }
}

TEST_CASE("iou basics") {
  const BoundingBox a = corner_to_state(0, 0, 10, 10);
  CHECK(iou(a, a) == doctest::Approx(1.0));

  const BoundingBox apart = corner_to_state(100, 100, 10, 10);
  CHECK(iou(a, apart) == doctest::Approx(0.0));

  const BoundingBox shifted = corner_to_state(5, 0, 10, 10);
  CHECK(iou(a, shifted) == doctest::Approx(1.0 / 3.0));
  CHECK(iou(shifted, a) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("iou symmetry, identity and scale invariance") {
  auto rng = make_rng(12);
  for (int i = 0; i < 500; ++i) {
    const BoundingBox a = random_box(rng);
    const BoundingBox b = random_box(rng);
    CHECK(iou(a, b) == doctest::Approx(iou(b, a)).epsilon(1e-12));
    CHECK(iou(a, a) == doctest::Approx(1.0));
    CHECK(iou(a, b) >= 0.0);
    CHECK(iou(a, b) <= 1.0);

    const double s = uniform(rng, 0.1, 10.0);
    const BoundingBox as{a.u * s, a.v * s, a.h * s, a.r};
    const BoundingBox bs{b.u * s, b.v * s, b.h * s, b.r};
    CHECK(iou(as, bs) == doctest::Approx(iou(a, b)).epsilon(1e-9));
  }
}

TEST_CASE("track history ring evicts the oldest state") {
  auto rng = make_rng(13);
  const Descriptor d = unit_descriptor(rng, 4);
  Track track(1, make_state(BoundingBox{0, 0, 10, 1}, d, 1), 3);
  CHECK(track.id() == 1);
  CHECK(track.history().size() == 1);
  CHECK(track.tentative);
  CHECK(track.hits == 1);
  CHECK(track.age == 1);

  for (int frame = 2; frame <= 6; ++frame) {
    track.push_state(make_state(BoundingBox{double(frame), 0, 10, 1}, d, frame));
  }
  CHECK(track.history().size() == 3);
  CHECK(track.oldest().frame == 4);
  CHECK(track.newest().frame == 6);

  CHECK_THROWS_AS(Track(0, make_state(BoundingBox{0, 0, 10, 1}, d, 1), 3), std::invalid_argument);
  CHECK_THROWS_AS(Track(1, make_state(BoundingBox{0, 0, 10, 1}, d, 1), 0), std::invalid_argument);
}
