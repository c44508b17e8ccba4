#pragma once

// Shared dimensions, vector aliases and error types for the planar pronking
// stack. Coordinate ordering everywhere: x, z, thigh_F, calf_F, thigh_R, calf_R.

#include <array>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace pronk {

inline constexpr int kBaseDofs = 2;
inline constexpr int kJointDofs = 4;
inline constexpr int kDofs = kBaseDofs + kJointDofs;
inline constexpr int kLegs = 2;

using Vec2 = Eigen::Vector2d;
using Vec4 = Eigen::Matrix<double, kJointDofs, 1>;
using Vec6 = Eigen::Matrix<double, kDofs, 1>;
using Mat2 = Eigen::Matrix2d;
using Mat6 = Eigen::Matrix<double, kDofs, kDofs>;
using Mat26 = Eigen::Matrix<double, 2, kDofs>;

enum class Leg { kFront = 0, kRear = 1 };

inline constexpr std::array<Leg, kLegs> kAllLegs = {Leg::kFront, Leg::kRear};

inline int index(Leg leg) { return static_cast<int>(leg); }
inline const char* name(Leg leg) { return leg == Leg::kFront ? "front" : "rear"; }

// Generalized-coordinate slot of a leg's thigh joint; the calf follows it.
inline int thigh_slot(Leg leg) { return kBaseDofs + 2 * index(leg); }
// Joint-vector (size kJointDofs) slot of a leg's thigh joint.
inline int thigh_joint(Leg leg) { return 2 * index(leg); }

enum class Phase { kFlight = 0, kStance = 1 };

inline const char* name(Phase p) { return p == Phase::kFlight ? "flight" : "stance"; }

// Bad arguments or dimension errors at an API boundary.
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Stance KKT system too badly conditioned to trust.
class DegenerateConfiguration : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Phase variable outside [0, 1].
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class GaitGenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Foot target outside the two-link annulus.
class WorkspaceError : public std::runtime_error {
 public:
  WorkspaceError(const std::string& what, double distance_to_boundary)
      : std::runtime_error(what), distance_to_boundary_(distance_to_boundary) {}
  double distance_to_boundary() const { return distance_to_boundary_; }

 private:
  double distance_to_boundary_;
};

class EstimatorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FilterLengthError : public std::length_error {
 public:
  using std::length_error::length_error;
};

class LibraryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pronk
