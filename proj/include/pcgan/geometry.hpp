// Copyright 2026 The pcgan Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PCGAN__GEOMETRY_HPP_
#define PCGAN__GEOMETRY_HPP_

#include <cmath>
#include <vector>

namespace pcgan
{

/// Planar position in meters.
struct Point
{
  double x{0.0};
  double y{0.0};

  friend bool operator==(const Point &, const Point &) = default;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }

inline double norm(Point a) { return std::hypot(a.x, a.y); }
inline double distance(Point a, Point b) { return norm(a - b); }

using Trajectory = std::vector<Point>;

}  // namespace pcgan

#endif  // PCGAN__GEOMETRY_HPP_
