#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "slamsim/camera.hpp"

using namespace slamsim;

namespace {

CameraIntrinsics test_cam() {
  CameraIntrinsics cam;
  cam.fx = 400.0;
  cam.fy = 400.0;
  cam.cx = 320.0;
  cam.cy = 240.0;
  cam.width = 640;
  cam.height = 480;
  return cam;
}

}  // namespace

TEST_CASE("intrinsics validation") {
  CameraIntrinsics cam = test_cam();
  CHECK_NOTHROW(cam.validate());
  cam.fx = 0.0;
  CHECK_THROWS_AS(cam.validate(), std::invalid_argument);
  cam = test_cam();
  cam.cx = 700.0;
  CHECK_THROWS_AS(cam.validate(), std::invalid_argument);
}

TEST_CASE("point projection uses the pinhole model") {
  const CameraIntrinsics cam = test_cam();
  const Eigen::Vector2d center = project_point(cam, Vector3(0, 0, 2));
  CHECK(center.x() == doctest::Approx(320.0));
  CHECK(center.y() == doctest::Approx(240.0));
  const Eigen::Vector2d off = project_point(cam, Vector3(0.5, 0.25, 1.0));
  CHECK(off.x() == doctest::Approx(320.0 + 400.0 * 0.5));
  CHECK(off.y() == doctest::Approx(240.0 + 400.0 * 0.25));
  CHECK_THROWS_WITH_AS((void)project_point(cam, Vector3(0, 0, 1e-7)),
                       doctest::Contains("behind camera"), std::domain_error);
}

TEST_CASE("camera looks along body +x") {
  const Matrix3 r = body_to_camera_rotation();
  // A point ahead of the body lands on the optical axis.
  CHECK((r * Vector3(3, 0, 0)).isApprox(Vector3(0, 0, 3), 1e-12));
  // Left (+y body) maps to image -x, up (+z body) to image -y.
  CHECK((r * Vector3(0, 1, 0)).isApprox(Vector3(-1, 0, 0), 1e-12));
  CHECK((r * Vector3(0, 0, 1)).isApprox(Vector3(0, -1, 0), 1e-12));
  CHECK(r.determinant() == doctest::Approx(1.0));
}

TEST_CASE("shape prior corners span the box") {
  const RobotShapePrior shape = RobotShapePrior::from_half_extents(1, Vector3(0.4, 0.3, 0.5));
  CHECK(shape.type_id == 1);
  Vector3 lo = shape.corners[0];
  Vector3 hi = shape.corners[0];
  for (const Vector3& c : shape.corners) {
    lo = lo.cwiseMin(c);
    hi = hi.cwiseMax(c);
  }
  CHECK(lo.isApprox(Vector3(-0.4, -0.3, -0.5), 1e-12));
  CHECK(hi.isApprox(Vector3(0.4, 0.3, 0.5), 1e-12));
  CHECK_THROWS_AS(RobotShapePrior::from_half_extents(0, Vector3(0.4, 0.0, 0.5)),
                  std::invalid_argument);
}

TEST_CASE("bbox projection of a target straight ahead") {
  const CameraIntrinsics cam = test_cam();
  const RobotShapePrior shape = RobotShapePrior::from_half_extents(0, Vector3(0.4, 0.3, 0.5));
  const Pose3 observer;  // identity, facing +x
  const Pose3 target(Rotation::identity(), Vector3(8, 0, 0));
  const auto box = project_robot_bbox(cam, observer, target, shape);
  REQUIRE(box.has_value());
  CHECK(box->border_touch_count == 0);
  const double cx = 0.5 * (box->box.xmin + box->box.xmax);
  const double cy = 0.5 * (box->box.ymin + box->box.ymax);
  CHECK(cx == doctest::Approx(320.0).epsilon(1e-9));
  CHECK(cy == doctest::Approx(240.0).epsilon(1e-9));
  // Taller than wide: z extent 0.5 vs lateral extent 0.3.
  CHECK(box->box.height() > box->box.width());
  // Near/far corner parallax: width between fx*0.6/8.4 and fx*0.6/7.6.
  CHECK(box->box.width() > 400.0 * 0.6 / 8.4 - 1e-9);
  CHECK(box->box.width() < 400.0 * 0.6 / 7.6 + 1e-9);
}

TEST_CASE("bbox projection misses behind and outside the image") {
  const CameraIntrinsics cam = test_cam();
  const RobotShapePrior shape = RobotShapePrior::from_half_extents(0, Vector3(0.4, 0.3, 0.5));
  const Pose3 observer;
  CHECK_FALSE(project_robot_bbox(cam, observer, Pose3(Rotation::identity(), Vector3(-5, 0, 0)), shape)
                  .has_value());
  // Ahead but far off to the side: projects entirely past the left edge.
  CHECK_FALSE(project_robot_bbox(cam, observer, Pose3(Rotation::identity(), Vector3(5, 40, 0)), shape)
                  .has_value());
}

TEST_CASE("border touches are counted on the unclamped box") {
  const CameraIntrinsics cam = test_cam();
  const RobotShapePrior shape = RobotShapePrior::from_half_extents(0, Vector3(0.4, 0.3, 0.5));
  const Pose3 observer;
  // Slide the target sideways until its box crosses the left image edge.
  bool saw_one_touch = false;
  for (double lateral = 3.0; lateral < 4.5; lateral += 0.05) {
    const auto box =
        project_robot_bbox(cam, observer, Pose3(Rotation::identity(), Vector3(5, lateral, 0)), shape);
    if (!box) break;
    if (box->box.xmin < 0.0) {
      CHECK(box->border_touch_count == 1);
      CHECK(box->clamped.xmin == 0.0);
      saw_one_touch = true;
      break;
    }
  }
  CHECK(saw_one_touch);
  // Very close target overflows every edge.
  const auto near_box =
      project_robot_bbox(cam, observer, Pose3(Rotation::identity(), Vector3(0.6, 0, 0)), shape);
  REQUIRE(near_box.has_value());
  CHECK(near_box->border_touch_count == 4);
}

TEST_CASE("bounding box clamping") {
  BoundingBox b{-10.0, -5.0, 650.0, 100.0};
  const BoundingBox c = b.clamped_to(640, 480);
  CHECK(c.xmin == 0.0);
  CHECK(c.ymin == 0.0);
  CHECK(c.xmax == 640.0);
  CHECK(c.ymax == 100.0);
  CHECK_FALSE(c.empty());
  BoundingBox outside{-20.0, 10.0, -5.0, 30.0};
  CHECK(outside.clamped_to(640, 480).empty());
}
