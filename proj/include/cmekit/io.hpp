#pragma once

#include "cmekit/empirical.hpp"
#include "cmekit/model.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace cmekit {

/// Shortest decimal that round-trips to the same double.
std::string format_double(double value);

/// One CSV line with a trailing newline; fields containing ',', '"' or a
/// newline are quoted.
std::string csv_row(const std::vector<std::string> &fields);

/// JointSpec JSON:
///   {"x_labels": ["a", {"name": "b", "embedding": [0.5]}, ...],
///    "y_labels": [...],
///    "p": [[...], ...],                       // m rows of q entries
///    "kernel_x": {"variant": "gaussian", "lengthscale": 0.5},
///    "kernel_y": {"variant": "delta"}}
/// Bare string labels get the scalar embedding of their position. Kernel
/// variants: gaussian, laplacian (lengthscale), polynomial (degree, offset),
/// linear, delta. Throws InvalidSpec on any schema or validation error.
JointSpec parse_joint_spec(std::string_view text);
JointSpec read_joint_spec(const std::filesystem::path &path);
std::string joint_spec_to_json(const JointSpec &spec);

/// Columns x_label,y_label.
void write_samples_csv(std::ostream &out, const SampleSet &samples, const FiniteJoint &joint);
/// Label names must exist in the joint; throws InvalidSpec otherwise.
SampleSet read_samples_csv(std::istream &in, const FiniteJoint &joint);

/// Sidecar manifest recording seed, generator and sample count.
std::string sample_manifest_json(const SampleSet &samples);

} // namespace cmekit
