#pragma once

#include <span>
#include <vector>

#include "placekit/geometry.hpp"

namespace placekit {

using Polygon = std::vector<Vec2>;

// Signed shoelace area; positive for counter-clockwise vertex order.
double signed_area(std::span<const Vec2> poly);
inline double area(std::span<const Vec2> poly) { return std::abs(signed_area(poly)); }

// Intersection of two convex counter-clockwise polygons (Sutherland-Hodgman).
Polygon clip_convex(std::span<const Vec2> subject, std::span<const Vec2> clip);

// Counter-clockwise convex hull (Andrew's monotone chain); collinear points
// are dropped.
Polygon convex_hull(std::vector<Vec2> points);

// Intersection area over the smaller polygon's area; 0 when either is empty.
double convex_iom(std::span<const Vec2> a, std::span<const Vec2> b);

// Minimum distance between two convex polygons; 0 when they overlap or touch.
double convex_distance(std::span<const Vec2> a, std::span<const Vec2> b);

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b);

bool point_in_convex(const Vec2& p, std::span<const Vec2> poly, double tol = 0.0);

}  // namespace placekit
