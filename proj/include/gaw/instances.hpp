#pragma once

// The three worked instances shipped with the tool.

#include <cmath>
#include <vector>

#include "gaw/io.hpp"

namespace gaw {

/// d = 1, T = 2. N_11 = 0, so the lambda = 0 optimizer is not unique.
inline InstanceFile example_nonunique() {
  InstanceFile f;
  f.name = "ex1";
  f.d = 1;
  f.steps = 2;
  f.a = Vec::Zero(2);
  f.b = (Vec(2) << 6.0, -6.0).finished();
  f.A = (Mat(2, 2) << 1.0, 2.0, 2.0, 5.0).finished();
  f.B = (Mat(2, 2) << 1.0, -0.5, -0.5, 1.25).finished();
  return f;
}

/// d = 1, T = 2. Unique Monge optimizer whose midpoint interpolation degenerates.
inline InstanceFile example_degenerate() {
  InstanceFile f = example_nonunique();
  f.name = "ex2";
  f.B = (Mat(2, 2) << 1.0, -1.0, -1.0, 2.0).finished();
  f.times = std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0};
  return f;
}

/// (sqrt2 / 10) [[7, -1], [1, 7]], a rotation.
inline Mat example_rotation() {
  return (std::sqrt(2.0) / 10.0) * (Mat(2, 2) << 7.0, -1.0, 1.0, 7.0).finished();
}

/// d = 2, T = 2 with L = [[I, 0], [R - I, I]] and M = [[I, 0], [I, I]].
inline InstanceFile example_multidim() {
  InstanceFile f;
  f.name = "ex3";
  f.d = 2;
  f.steps = 2;
  f.a = Vec::Zero(4);
  f.b = Vec::Zero(4);
  const Mat id = Mat::Identity(2, 2);
  const Mat l21 = example_rotation() - id;
  Mat l = Mat::Zero(4, 4);
  l << id, Mat::Zero(2, 2), l21, id;
  Mat m = Mat::Zero(4, 4);
  m << id, Mat::Zero(2, 2), id, id;
  f.A = symmetrize(l * l.transpose());
  f.B = m * m.transpose();
  return f;
}

inline std::vector<InstanceFile> bundled_examples() {
  return {example_nonunique(), example_degenerate(), example_multidim()};
}

}  // namespace gaw
