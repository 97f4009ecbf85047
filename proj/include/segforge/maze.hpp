#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace segforge {

enum class Cell : std::uint8_t { Wall, Path };

struct GridPos {
  int x = 0;
  int y = 0;
  bool operator==(const GridPos&) const = default;
};

// Row-major wall/path grid. A valid maze has an all-wall border and a single
// connected component of path cells.
struct MazeGrid {
  std::string maze_id;
  std::uint64_t seed = 0;
  int width = 0;
  int height = 0;
  std::vector<Cell> cells;

  Cell at(int x, int y) const { return cells[static_cast<std::size_t>(y) * width + x]; }
  Cell& at(int x, int y) { return cells[static_cast<std::size_t>(y) * width + x]; }
  bool is_path(int x, int y) const {
    return x >= 0 && y >= 0 && x < width && y < height && at(x, y) == Cell::Path;
  }
  bool is_path(GridPos p) const { return is_path(p.x, p.y); }

  bool operator==(const MazeGrid&) const = default;
};

// Builds a grid from rows of '#' (wall) and '.' (path). Handy for fixtures.
MazeGrid maze_from_rows(const std::vector<std::string>& rows, std::string maze_id = "fixture");
std::vector<std::string> maze_to_rows(const MazeGrid& maze);

struct MazeFeatures {
  int total_path = 0;
  int total_corners = 0;
  int total_intersections = 0;
  int total_deadend = 0;
  double complexity = 0.0;

  bool operator==(const MazeFeatures&) const = default;
};

// Perfect maze from a seeded randomized depth-first carve on the odd lattice.
// width and height must be odd and >= 5 (DimensionTooSmall otherwise).
MazeGrid generate_maze(std::uint64_t seed, int width, int height, std::string maze_id = {});

// Counts path cells by their number of orthogonal path neighbours:
// 1 -> dead end, 2 at a right angle -> corner, >= 3 -> intersection.
// complexity = (corners + intersections + dead ends) / path cells.
MazeFeatures extract_features(const MazeGrid& maze);

// Path cells reachable from the first path cell (row-major). Equal to the
// number of path cells for a connected maze.
int connected_path_cells(const MazeGrid& maze);

// Run-length encoding of the cells, e.g. "22#5.1#" for 22 walls, 5 paths, 1 wall.
std::string encode_cells(const MazeGrid& maze);
std::vector<Cell> decode_cells(std::string_view rle, std::size_t expected_size);

}  // namespace segforge
