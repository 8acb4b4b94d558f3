// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace chanmap {

/// 2D position in meters.
struct WorldPoint {
  double x = 0.0;
  double y = 0.0;
};

inline bool operator==(WorldPoint a, WorldPoint b) { return a.x == b.x && a.y == b.y; }

inline double distance(WorldPoint a, WorldPoint b) {
  return std::hypot(b.x - a.x, b.y - a.y);
}

/// Integer cell coordinates on an occupancy grid.
struct CellIndex {
  int ix = 0;
  int iy = 0;
};

inline bool operator==(CellIndex a, CellIndex b) { return a.ix == b.ix && a.iy == b.iy; }

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class InvalidParams : public Error {
public:
  using Error::Error;
};

class DimensionMismatch : public Error {
public:
  using Error::Error;
};

class OutOfBounds : public Error {
public:
  using Error::Error;
};

class InvalidEndpoint : public Error {
public:
  using Error::Error;
};

class EmptyDataset : public Error {
public:
  using Error::Error;
};

class EmptyStratum : public Error {
public:
  using Error::Error;
};

class UntrainedModel : public Error {
public:
  using Error::Error;
};

class CorruptModelFile : public Error {
public:
  using Error::Error;
};

class StartOutdoors : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

class EmptyInput : public Error {
public:
  using Error::Error;
};

}  // namespace chanmap
