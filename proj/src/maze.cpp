#include "segforge/maze.hpp"

#include <array>
#include <cctype>
#include <queue>

#include "segforge/error.hpp"
#include "segforge/rng.hpp"

namespace segforge {

namespace {

constexpr std::array<GridPos, 4> kSteps{{{0, -1}, {1, 0}, {0, 1}, {-1, 0}}};

}  // namespace

MazeGrid maze_from_rows(const std::vector<std::string>& rows, std::string maze_id) {
  MazeGrid m;
  m.maze_id = std::move(maze_id);
  m.height = static_cast<int>(rows.size());
  m.width = rows.empty() ? 0 : static_cast<int>(rows.front().size());
  m.cells.reserve(static_cast<std::size_t>(m.width) * m.height);
  for (const auto& row : rows) {
    if (static_cast<int>(row.size()) != m.width) throw MalformedRecord("ragged maze rows");
    for (char c : row) m.cells.push_back(c == '#' ? Cell::Wall : Cell::Path);
  }
  return m;
}

std::vector<std::string> maze_to_rows(const MazeGrid& maze) {
  std::vector<std::string> rows;
  for (int y = 0; y < maze.height; ++y) {
    std::string row;
    for (int x = 0; x < maze.width; ++x) row.push_back(maze.at(x, y) == Cell::Wall ? '#' : '.');
    rows.push_back(std::move(row));
  }
  return rows;
}

MazeGrid generate_maze(std::uint64_t seed, int width, int height, std::string maze_id) {
  if (width < 5 || height < 5) {
    throw DimensionTooSmall("maze must be at least 5x5, got " + std::to_string(width) + "x" +
                            std::to_string(height));
  }
  if (width % 2 == 0 || height % 2 == 0) {
    throw DimensionTooSmall("maze dimensions must be odd, got " + std::to_string(width) + "x" +
                            std::to_string(height));
  }
  MazeGrid m;
  m.maze_id = std::move(maze_id);
  m.seed = seed;
  m.width = width;
  m.height = height;
  m.cells.assign(static_cast<std::size_t>(width) * height, Cell::Wall);

  Rng rng(seed);
  std::vector<GridPos> stack{{1, 1}};
  m.at(1, 1) = Cell::Path;
  while (!stack.empty()) {
    const GridPos cur = stack.back();
    std::array<GridPos, 4> open{};
    std::size_t n_open = 0;
    for (const auto& s : kSteps) {
      const GridPos next{cur.x + 2 * s.x, cur.y + 2 * s.y};
      if (next.x > 0 && next.y > 0 && next.x < width - 1 && next.y < height - 1 &&
          m.at(next.x, next.y) == Cell::Wall) {
        open[n_open++] = next;
      }
    }
    if (n_open == 0) {
      stack.pop_back();
      continue;
    }
    const GridPos next = open[rng.index(n_open)];
    m.at((cur.x + next.x) / 2, (cur.y + next.y) / 2) = Cell::Path;
    m.at(next.x, next.y) = Cell::Path;
    stack.push_back(next);
  }
  return m;
}

MazeFeatures extract_features(const MazeGrid& maze) {
  MazeFeatures f;
  for (int y = 0; y < maze.height; ++y) {
    for (int x = 0; x < maze.width; ++x) {
      if (!maze.is_path(x, y)) continue;
      ++f.total_path;
      const bool up = maze.is_path(x, y - 1);
      const bool down = maze.is_path(x, y + 1);
      const bool left = maze.is_path(x - 1, y);
      const bool right = maze.is_path(x + 1, y);
      const int degree = up + down + left + right;
      if (degree == 1) {
        ++f.total_deadend;
      } else if (degree >= 3) {
        ++f.total_intersections;
      } else if (degree == 2 && (up || down) && (left || right)) {
        ++f.total_corners;
      }
    }
  }
  if (f.total_path > 0) {
    f.complexity = static_cast<double>(f.total_corners + f.total_intersections + f.total_deadend) /
                   static_cast<double>(f.total_path);
  }
  return f;
}

int connected_path_cells(const MazeGrid& maze) {
  std::size_t start = maze.cells.size();
  for (std::size_t i = 0; i < maze.cells.size(); ++i) {
    if (maze.cells[i] == Cell::Path) {
      start = i;
      break;
    }
  }
  if (start == maze.cells.size()) return 0;
  std::vector<bool> seen(maze.cells.size(), false);
  std::queue<GridPos> q;
  q.push({static_cast<int>(start % maze.width), static_cast<int>(start / maze.width)});
  seen[start] = true;
  int count = 0;
  while (!q.empty()) {
    const GridPos p = q.front();
    q.pop();
    ++count;
    for (const auto& s : kSteps) {
      const GridPos n{p.x + s.x, p.y + s.y};
      if (!maze.is_path(n)) continue;
      const auto idx = static_cast<std::size_t>(n.y) * maze.width + n.x;
      if (seen[idx]) continue;
      seen[idx] = true;
      q.push(n);
    }
  }
  return count;
}

std::string encode_cells(const MazeGrid& maze) {
  std::string out;
  std::size_t i = 0;
  while (i < maze.cells.size()) {
    std::size_t j = i;
    while (j < maze.cells.size() && maze.cells[j] == maze.cells[i]) ++j;
    out += std::to_string(j - i);
    out.push_back(maze.cells[i] == Cell::Wall ? '#' : '.');
    i = j;
  }
  return out;
}

std::vector<Cell> decode_cells(std::string_view rle, std::size_t expected_size) {
  std::vector<Cell> cells;
  cells.reserve(expected_size);
  std::size_t run = 0;
  bool have_digits = false;
  for (char c : rle) {
    if (std::isdigit(static_cast<unsigned char>(c))) {
      run = run * 10 + static_cast<std::size_t>(c - '0');
      have_digits = true;
      continue;
    }
    if ((c != '#' && c != '.') || !have_digits || cells.size() + run > expected_size) {
      throw MalformedRecord("bad run-length maze encoding");
    }
    cells.insert(cells.end(), run, c == '#' ? Cell::Wall : Cell::Path);
    run = 0;
    have_digits = false;
  }
  if (have_digits || cells.size() != expected_size) {
    throw MalformedRecord("run-length maze encoding has wrong size");
  }
  return cells;
}

}  // namespace segforge
