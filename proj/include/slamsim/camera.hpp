#pragma once

#include <array>
#include <optional>

#include "slamsim/geometry.hpp"

namespace slamsim {

struct CameraIntrinsics {
  double fx = 500.0;
  double fy = 500.0;
  double cx = 320.0;
  double cy = 240.0;
  int width = 640;
  int height = 480;

  // Throws std::invalid_argument on a non-physical parameter set.
  void validate() const;
};

// Axis-aligned box in pixel coordinates. Stored unclamped, so it may extend
// beyond the image; clamped_to() restricts it to [0,w]x[0,h].
struct BoundingBox {
  double xmin = 0.0;
  double ymin = 0.0;
  double xmax = 0.0;
  double ymax = 0.0;

  double width() const { return xmax - xmin; }
  double height() const { return ymax - ymin; }
  BoundingBox clamped_to(double image_width, double image_height) const;
  bool empty() const { return width() <= 0.0 || height() <= 0.0; }
};

// Known body-frame extent of a robot type: the 8 corners of its bounding
// volume, symmetric about the body center.
struct RobotShapePrior {
  int type_id = 0;
  std::array<Vector3, 8> corners{};

  static RobotShapePrior from_half_extents(int type_id, const Vector3& half_extents);
};

// Fixed body-to-camera mount: camera looks along body +x, image x to the
// right (body -y), image y down (body -z).
Matrix3 body_to_camera_rotation();

// Pinhole projection of a camera-frame point; throws std::domain_error
// ("behind camera") when z <= 1e-6.
Eigen::Vector2d project_point(const CameraIntrinsics& cam, const Vector3& p_cam);

struct ProjectedBox {
  BoundingBox box;          // unclamped
  BoundingBox clamped;      // restricted to the image
  int border_touch_count = 0;  // image edges the unclamped box crosses or touches
};

// Projects all 8 shape corners into the observer's camera. Returns nullopt
// ("not visible") when any corner is behind the camera or the clamped box is
// empty; partial-frustum cases are left to the border-touch count.
std::optional<ProjectedBox> project_robot_bbox(const CameraIntrinsics& cam,
                                               const Pose3& observer_pose,
                                               const Pose3& target_pose,
                                               const RobotShapePrior& shape);

}  // namespace slamsim
