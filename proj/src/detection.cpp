#include "slamsim/detection.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "slamsim/agent.hpp"

namespace slamsim {

void DetectorModel::validate() const {
  if (max_range <= 0.0) throw std::invalid_argument("detector: max_range must be positive");
  if (base_detect_prob < 0.0 || base_detect_prob > 1.0) {
    throw std::invalid_argument("detector: base_detect_prob outside [0,1]");
  }
  if (error_curve.empty()) throw std::invalid_argument("detector: error curve needs at least one knot");
  for (std::size_t i = 0; i < error_curve.size(); ++i) {
    const ErrorKnot& k = error_curve[i];
    if (k.trans_std <= 0.0 || k.rot_std <= 0.0) {
      throw std::invalid_argument("detector: error stddevs must be positive");
    }
    if (i > 0 && k.distance <= error_curve[i - 1].distance) {
      throw std::invalid_argument("detector: error curve distances must be strictly increasing");
    }
  }
  if (kind == DetectorKind::marker) {
    if (max_view_angle <= 0.0 || max_view_angle > M_PI) {
      throw std::invalid_argument("detector: max_view_angle outside (0, pi]");
    }
  } else {
    if (aspect_ratio_limit <= 1.0) throw std::invalid_argument("detector: aspect_ratio_limit must exceed 1");
    if (min_confidence < 0.0 || min_confidence > 1.0) {
      throw std::invalid_argument("detector: min_confidence outside [0,1]");
    }
  }
}

DetectorModel default_marker_model() {
  DetectorModel m;
  m.kind = DetectorKind::marker;
  m.max_range = 5.0;
  m.max_view_angle = M_PI / 3.0;  // 60 deg half-cone around the array normal
  m.base_detect_prob = 0.95;
  m.error_curve = {{0.0, 0.03, 0.02}};
  return m;
}

DetectorModel default_markerless_model() {
  DetectorModel m;
  m.kind = DetectorKind::markerless;
  m.max_range = 17.0;
  m.base_detect_prob = 0.9;
  m.aspect_ratio_limit = 3.0;
  m.min_confidence = 0.05;
  // Rotation error shrinks with distance, translation error grows; the
  // opposite trade-off from the marker model.
  m.error_curve = {{1.0, 0.08, 0.25}, {5.0, 0.10, 0.10}, {17.0, 0.20, 0.06}};
  return m;
}

ErrorStddevs error_at_distance(const DetectorModel& model, double d) {
  if (d < 0.0) throw std::invalid_argument("error_at_distance: negative distance");
  const auto& curve = model.error_curve;
  if (d <= curve.front().distance) return {curve.front().trans_std, curve.front().rot_std};
  if (d >= curve.back().distance) return {curve.back().trans_std, curve.back().rot_std};
  for (std::size_t i = 1; i < curve.size(); ++i) {
    if (d <= curve[i].distance) {
      const auto& a = curve[i - 1];
      const auto& b = curve[i];
      const double t = (d - a.distance) / (b.distance - a.distance);
      return {a.trans_std + t * (b.trans_std - a.trans_std),
              a.rot_std + t * (b.rot_std - a.rot_std)};
    }
  }
  return {curve.back().trans_std, curve.back().rot_std};  // unreachable
}

FilterResult filter_instances(std::vector<CandidateDetection> candidates, double r) {
  if (r <= 1.0) throw std::invalid_argument("filter_instances: r must exceed 1");
  FilterResult result;
  if (candidates.empty()) {
    result.rejection = FilterRejection::empty;
    return result;
  }
  const auto top = std::max_element(
      candidates.begin(), candidates.end(),
      [](const CandidateDetection& a, const CandidateDetection& b) { return a.confidence < b.confidence; });
  const double w = top->bbox.width();
  const double h = top->bbox.height();
  const double ratio = h / w;
  if (!(ratio >= 1.0 / r && ratio <= r)) {  // NaN from a degenerate box also lands here
    result.rejection = FilterRejection::aspect_ratio;
    return result;
  }
  if (top->border_touch_count > 1) {
    result.rejection = FilterRejection::borders;
    return result;
  }
  result.accepted = *top;
  return result;
}

namespace {

DetectionConstraint make_constraint(const AgentState& observer, const AgentState& target,
                                    const DetectorModel& model, const ErrorStddevs& stds, Rng& rng) {
  DetectionConstraint c;
  c.observer_id = observer.robot_id;
  c.target_id = target.robot_id;
  c.time = observer.time;
  c.source = model.kind;
  c.information = InformationMatrix::from_stddevs(stds.rot_std, stds.trans_std);
  const Twist noise = sample_twist_noise(c.information, rng);
  c.measured_relative_pose = compose(between(observer.gt_pose, target.gt_pose), exp(noise));
  return c;
}

}  // namespace

DetectionResult attempt_detection(const AgentState& observer, const AgentState& target,
                                  const CameraIntrinsics& cam, const DetectorModel& model,
                                  const RobotShapePrior& shape, Rng& rng) {
  DetectionResult result;
  const Vector3 offset = target.gt_pose.translation - observer.gt_pose.translation;
  const double distance = offset.norm();

  if (model.kind == DetectorKind::marker) {
    if (distance > model.max_range) {
      result.miss = MissReason::range;
      return result;
    }
    // Marker array normal is the target's body +x; it must face the observer.
    const Vector3 normal = target.gt_pose.rotation * Vector3::UnitX();
    const Vector3 line_of_sight = (-offset).normalized();
    const double angle = std::acos(std::clamp(normal.dot(line_of_sight), -1.0, 1.0));
    if (angle > model.max_view_angle) {
      result.miss = MissReason::view_angle;
      return result;
    }
    if (!rng.bernoulli(model.base_detect_prob)) {
      result.miss = MissReason::chance;
      return result;
    }
    const ErrorStddevs stds{model.error_curve.front().trans_std, model.error_curve.front().rot_std};
    result.constraint = make_constraint(observer, target, model, stds, rng);
    return result;
  }

  const std::optional<ProjectedBox> projected =
      project_robot_bbox(cam, observer.gt_pose, target.gt_pose, shape);
  if (!projected) {
    result.miss = MissReason::not_in_view;
    return result;
  }
  const double decay = std::clamp(1.0 - distance / model.max_range, 0.0, 1.0);
  const double confidence =
      std::clamp(model.base_detect_prob * decay + rng.uniform(-0.05, 0.05), 0.0, 1.0);
  if (confidence < model.min_confidence) {
    result.miss = MissReason::confidence;
    return result;
  }
  CandidateDetection candidate;
  candidate.bbox = projected->clamped;
  candidate.border_touch_count = projected->border_touch_count;
  candidate.confidence = confidence;
  candidate.target_id = target.robot_id;
  result.candidate = candidate;
  const FilterResult filtered = filter_instances({candidate}, model.aspect_ratio_limit);
  if (!filtered.accepted) {
    result.miss = filtered.rejection == FilterRejection::borders ? MissReason::borders
                                                                 : MissReason::aspect_ratio;
    return result;
  }
  result.constraint = make_constraint(observer, target, model, error_at_distance(model, distance), rng);
  return result;
}

const char* to_string(MissReason reason) {
  switch (reason) {
    case MissReason::none: return "none";
    case MissReason::range: return "range";
    case MissReason::view_angle: return "view_angle";
    case MissReason::chance: return "chance";
    case MissReason::not_in_view: return "not_in_view";
    case MissReason::confidence: return "confidence";
    case MissReason::aspect_ratio: return "aspect_ratio";
    case MissReason::borders: return "borders";
  }
  return "unknown";
}

const char* to_string(FilterRejection rejection) {
  switch (rejection) {
    case FilterRejection::none: return "none";
    case FilterRejection::empty: return "empty";
    case FilterRejection::aspect_ratio: return "aspect_ratio";
    case FilterRejection::borders: return "borders";
  }
  return "unknown";
}

const char* to_string(DetectorKind kind) {
  return kind == DetectorKind::marker ? "marker" : "markerless";
}

}  // namespace slamsim
