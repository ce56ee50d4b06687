#pragma once

#include <optional>
#include <string>
#include <vector>

#include "slamsim/camera.hpp"
#include "slamsim/geometry.hpp"
#include "slamsim/rng.hpp"

namespace slamsim {

struct AgentState;

enum class DetectorKind { marker, markerless };

// One sensor model. The marker model is range- and orientation-gated with a
// hard cutoff; the markerless model trades range for a distance-dependent
// error profile and runs the bounding-box instance filters.
struct DetectorModel {
  DetectorKind kind = DetectorKind::marker;
  double max_range = 0.0;
  double max_view_angle = 0.0;        // marker only
  double base_detect_prob = 1.0;
  double aspect_ratio_limit = 2.0;    // markerless only, > 1
  double min_confidence = 0.0;        // markerless only
  struct ErrorKnot {
    double distance = 0.0;
    double trans_std = 0.0;
    double rot_std = 0.0;
  };
  std::vector<ErrorKnot> error_curve;

  void validate() const;
};

DetectorModel default_marker_model();
DetectorModel default_markerless_model();

// (trans_std, rot_std) at true distance d: piecewise-linear over the curve
// knots, constant beyond both ends.
struct ErrorStddevs {
  double trans_std;
  double rot_std;
};
ErrorStddevs error_at_distance(const DetectorModel& model, double d);

// Inter-robot relative pose measurement, observer body -> target body.
struct DetectionConstraint {
  int observer_id = -1;
  int target_id = -1;
  double time = 0.0;
  Pose3 measured_relative_pose;
  InformationMatrix information = InformationMatrix::identity();
  DetectorKind source = DetectorKind::marker;
};

struct CandidateDetection {
  BoundingBox bbox;
  int border_touch_count = 0;
  double confidence = 0.0;
  int target_id = -1;
};

enum class FilterRejection { none, empty, aspect_ratio, borders };

struct FilterResult {
  std::optional<CandidateDetection> accepted;
  FilterRejection rejection = FilterRejection::none;
};

// Instance filtering: keep only the highest-confidence candidate, then accept
// iff 1/r <= height/width <= r and the box touches at most one image border.
// Lower-ranked candidates are never evaluated.
FilterResult filter_instances(std::vector<CandidateDetection> candidates, double r);

enum class MissReason {
  none,
  range,        // marker: beyond hard range cutoff
  view_angle,   // marker: array normal turned away from observer
  chance,       // marker: per-attempt Bernoulli failed
  not_in_view,  // markerless: target behind camera or box outside the image
  confidence,   // markerless: synthesized confidence below threshold
  aspect_ratio,
  borders,
};

const char* to_string(MissReason reason);
const char* to_string(FilterRejection rejection);
const char* to_string(DetectorKind kind);

struct DetectionResult {
  std::optional<DetectionConstraint> constraint;
  MissReason miss = MissReason::none;
  // Markerless only: the synthesized candidate (clamped box, borders,
  // confidence), kept whenever projection succeeded so logs can re-check the
  // filter invariants on every event.
  std::optional<CandidateDetection> candidate;

  bool ok() const { return constraint.has_value(); }
};

// Runs one detection attempt of `model` by `observer` on `target`. Misses are
// ordinary values; the rng is consumed only by the branch that runs, so
// enabling one model never perturbs the other's outcome stream.
DetectionResult attempt_detection(const AgentState& observer, const AgentState& target,
                                  const CameraIntrinsics& cam, const DetectorModel& model,
                                  const RobotShapePrior& shape, Rng& rng);

}  // namespace slamsim
