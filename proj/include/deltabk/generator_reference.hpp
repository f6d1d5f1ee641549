#pragma once

// Hand-written closed forms for the generator example at rate 2, kept
// deliberately separate from the synthesis code: no helper is shared with
// the generic recursion, so agreement between the two is meaningful. These
// are comparison targets, transcribed once and frozen.

#include <Eigen/Dense>

#include "deltabk/systems.hpp"

namespace deltabk {

// Feedback law in transformed coordinates eta, for rate 2.
double reference_control(const GeneratorParameters& p,
                         const Eigen::Vector3d& eta, double uhat);

// The 3x3 metric in transformed coordinates, for rate 2. Only the first
// coordinate enters.
Eigen::Matrix3d reference_metric(const GeneratorParameters& p,
                                 const Eigen::Vector3d& y);

// Open-loop field in original coordinates.
Eigen::Vector3d reference_field(const GeneratorParameters& p,
                                const Eigen::Vector3d& x, double u);

// Open-loop field in transformed coordinates.
Eigen::Vector3d reference_transformed_field(const GeneratorParameters& p,
                                            const Eigen::Vector3d& y,
                                            double u);

// The gain-normalizing coordinate change and its Jacobian.
Eigen::Vector3d reference_transform(const GeneratorParameters& p,
                                    const Eigen::Vector3d& x);
Eigen::Matrix3d reference_transform_jacobian(const GeneratorParameters& p,
                                             const Eigen::Vector3d& x);

// First two virtual controls in transformed coordinates, for rate 2.
double reference_phi1(const GeneratorParameters& p, double y1);
double reference_phi2(const GeneratorParameters& p, double y1, double y2);

}  // namespace deltabk
