#include "slamsim/camera.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace slamsim {

void CameraIntrinsics::validate() const {
  if (width <= 0 || height <= 0) throw std::invalid_argument("camera: image size must be positive");
  if (fx <= 0.0 || fy <= 0.0) throw std::invalid_argument("camera: focal lengths must be positive");
  if (cx <= 0.0 || cx >= width || cy <= 0.0 || cy >= height) {
    throw std::invalid_argument("camera: principal point outside image");
  }
}

BoundingBox BoundingBox::clamped_to(double image_width, double image_height) const {
  BoundingBox b;
  b.xmin = std::clamp(xmin, 0.0, image_width);
  b.xmax = std::clamp(xmax, 0.0, image_width);
  b.ymin = std::clamp(ymin, 0.0, image_height);
  b.ymax = std::clamp(ymax, 0.0, image_height);
  return b;
}

RobotShapePrior RobotShapePrior::from_half_extents(int type_id, const Vector3& half_extents) {
  if ((half_extents.array() <= 0.0).any()) {
    throw std::invalid_argument("shape prior: half extents must be positive");
  }
  RobotShapePrior shape;
  shape.type_id = type_id;
  int i = 0;
  for (const double sx : {-1.0, 1.0})
    for (const double sy : {-1.0, 1.0})
      for (const double sz : {-1.0, 1.0})
        shape.corners[i++] = Vector3(sx * half_extents.x(), sy * half_extents.y(), sz * half_extents.z());
  return shape;
}

Matrix3 body_to_camera_rotation() {
  Matrix3 r;
  // rows: camera axes expressed in body coordinates
  r << 0.0, -1.0, 0.0,   // cam x = body -y
       0.0, 0.0, -1.0,   // cam y = body -z
       1.0, 0.0, 0.0;    // cam z = body +x
  return r;
}

Eigen::Vector2d project_point(const CameraIntrinsics& cam, const Vector3& p_cam) {
  if (p_cam.z() <= 1e-6) throw std::domain_error("behind camera");
  return {cam.fx * p_cam.x() / p_cam.z() + cam.cx, cam.fy * p_cam.y() / p_cam.z() + cam.cy};
}

std::optional<ProjectedBox> project_robot_bbox(const CameraIntrinsics& cam,
                                               const Pose3& observer_pose,
                                               const Pose3& target_pose,
                                               const RobotShapePrior& shape) {
  const Matrix3 r_bc = body_to_camera_rotation();
  const Pose3 world_to_body = inverse(observer_pose);

  BoundingBox box;
  box.xmin = box.ymin = std::numeric_limits<double>::infinity();
  box.xmax = box.ymax = -std::numeric_limits<double>::infinity();
  for (const Vector3& corner : shape.corners) {
    const Vector3 p_cam = r_bc * (world_to_body * (target_pose * corner));
    if (p_cam.z() <= 1e-6) return std::nullopt;
    const Eigen::Vector2d px = project_point(cam, p_cam);
    box.xmin = std::min(box.xmin, px.x());
    box.xmax = std::max(box.xmax, px.x());
    box.ymin = std::min(box.ymin, px.y());
    box.ymax = std::max(box.ymax, px.y());
  }

  ProjectedBox result;
  result.box = box;
  result.clamped = box.clamped_to(cam.width, cam.height);
  if (result.clamped.empty()) return std::nullopt;
  result.border_touch_count = (box.xmin <= 0.0) + (box.xmax >= cam.width) +
                              (box.ymin <= 0.0) + (box.ymax >= cam.height);
  return result;
}

}  // namespace slamsim
