#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "tlo/lmdp.hpp"

namespace tlo {

enum class Tile { Free, HighPenalty, LowPenalty };

enum class MazeAction : ActionId { Up = 0, Down = 1, Left = 2, Right = 3 };

inline constexpr std::size_t kMazeActions = 4;

// Column first, row 0 at the bottom.
struct Cell {
    int col = 0;
    int row = 0;
    friend bool operator==(const Cell&, const Cell&) = default;
};

enum class ObjectiveScheme {
    EndpointPrimary,     // R1 = goal reward on entering G, R2 = tile penalty
    PathPenaltyPrimary,  // R1 = tile penalty (+1 on G), R2 = -1 per step
};

struct MazeSpec {
    int width = 0;
    int height = 0;
    Cell start;
    Cell goal;
    std::vector<Tile> tiles;  // row-major from row 0
    double high_penalty = -5.0;
    double low_penalty = -4.0;
    double goal_reward = 1.0;
    ObjectiveScheme scheme = ObjectiveScheme::EndpointPrimary;

    Tile tile(Cell c) const { return tiles[static_cast<std::size_t>(c.row * width + c.col)]; }
    bool contains(Cell c) const { return c.col >= 0 && c.col < width && c.row >= 0 && c.row < height; }
    double penalty(Cell c) const;
    StateId state(Cell c) const { return static_cast<StateId>(c.row * width + c.col); }
    Cell cell(StateId s) const {
        return {static_cast<int>(s) % width, static_cast<int>(s) / width};
    }
    void validate() const;
};

// Accepts the drawn layout: rows of |__|, |G_|, |S_|, |HH|, |hh| cells, top row
// first, optional row labels, borders and column labels. Throws ParseError.
MazeSpec parse_maze(std::string_view text);
std::string format_maze(const MazeSpec& spec);

Cell maze_move(const MazeSpec& spec, Cell from, MazeAction a);

TabularMomdp maze_to_momdp(const MazeSpec& spec, double gamma = 0.99);

// maze-small, maze-extended, maze-early-and-late, maze-concave-simple.
const std::map<std::string, std::string>& builtin_maze_texts();
std::map<std::string, MazeSpec> builtin_mazes();
MazeSpec builtin_maze(const std::string& name);

std::string to_string(ObjectiveScheme s);
ObjectiveScheme objective_scheme_from_string(const std::string& s);

}  // namespace tlo
