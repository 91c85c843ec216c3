#include "tlo/maze.hpp"

#include <algorithm>
#include <optional>
#include <regex>
#include <sstream>

#include <fmt/format.h>

#include "tlo/errors.hpp"

namespace tlo {

double MazeSpec::penalty(Cell c) const {
    switch (tile(c)) {
        case Tile::HighPenalty: return high_penalty;
        case Tile::LowPenalty: return low_penalty;
        case Tile::Free: break;
    }
    return 0.0;
}

void MazeSpec::validate() const {
    if (width <= 0 || height <= 0) throw ContractError("maze must have positive size");
    if (tiles.size() != static_cast<std::size_t>(width * height))
        throw ContractError("maze tile map has wrong size");
    if (!contains(start) || !contains(goal)) throw ContractError("start or goal outside the maze");
    if (start == goal) throw ContractError("start and goal coincide");
    if (tile(start) != Tile::Free || tile(goal) != Tile::Free)
        throw ContractError("start and goal must be free tiles");
}

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

struct RawRow {
    std::size_t line;
    std::vector<std::string> cells;
    std::optional<int> label;
};

}  // namespace

MazeSpec parse_maze(std::string_view text) {
    static const std::regex row_re(R"(^(\|?(?:[^|\s]{2}\|)*[^|\s]{2}\|?)\s*(\d+)?$)");
    static const std::regex digits_re(R"(^[\d\s]+$)");
    std::vector<RawRow> rows;
    std::istringstream in{std::string(text)};
    std::string raw;
    std::size_t lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const std::string line = trim(raw);
        if (line.empty() || line == "MAZE") continue;
        if (line.find('|') == std::string::npos) {
            if (std::all_of(line.begin(), line.end(), [](char c) { return c == '_'; })) continue;
            if (std::regex_match(line, digits_re)) continue;
            throw ParseError(lineno, "unrecognised line '" + line + "'");
        }
        std::smatch m;
        if (!std::regex_match(line, m, row_re)) throw ParseError(lineno, "malformed maze row '" + line + "'");
        RawRow row{lineno, {}, std::nullopt};
        if (m[2].matched) row.label = std::stoi(m[2].str());
        std::string body = m[1].str();
        if (body.front() == '|') body.erase(0, 1);
        if (!body.empty() && body.back() == '|') body.pop_back();
        std::istringstream cells(body);
        std::string cell;
        while (std::getline(cells, cell, '|')) row.cells.push_back(cell);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ParseError(lineno, "no maze rows found");

    MazeSpec spec;
    spec.height = static_cast<int>(rows.size());
    spec.width = static_cast<int>(rows.front().cells.size());
    spec.tiles.assign(static_cast<std::size_t>(spec.width * spec.height), Tile::Free);
    std::optional<std::size_t> start_line, goal_line;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        const int y = spec.height - 1 - static_cast<int>(i);
        if (static_cast<int>(r.cells.size()) != spec.width)
            throw ParseError(r.line, fmt::format("row has {} cells, expected {}", r.cells.size(), spec.width));
        if (r.label && *r.label != y)
            throw ParseError(r.line, fmt::format("row label {} does not match position {}", *r.label, y));
        for (int x = 0; x < spec.width; ++x) {
            const std::string& c = r.cells[static_cast<std::size_t>(x)];
            Tile t = Tile::Free;
            if (c == "__") {
            } else if (c == "HH") {
                t = Tile::HighPenalty;
            } else if (c == "hh") {
                t = Tile::LowPenalty;
            } else if (c == "S_") {
                if (start_line) throw ParseError(r.line, "duplicate start cell");
                start_line = r.line;
                spec.start = {x, y};
            } else if (c == "G_") {
                if (goal_line) throw ParseError(r.line, "duplicate goal cell");
                goal_line = r.line;
                spec.goal = {x, y};
            } else {
                throw ParseError(r.line, "unknown cell '" + c + "'");
            }
            spec.tiles[static_cast<std::size_t>(y * spec.width + x)] = t;
        }
    }
    if (!start_line) throw ParseError(lineno, "maze has no start cell S_");
    if (!goal_line) throw ParseError(lineno, "maze has no goal cell G_");
    return spec;
}

std::string format_maze(const MazeSpec& spec) {
    std::string out = std::string(static_cast<std::size_t>(spec.width * 3 + 1), '_') + "\n";
    for (int y = spec.height - 1; y >= 0; --y) {
        out += '|';
        for (int x = 0; x < spec.width; ++x) {
            const Cell c{x, y};
            if (c == spec.start) out += "S_";
            else if (c == spec.goal) out += "G_";
            else if (spec.tile(c) == Tile::HighPenalty) out += "HH";
            else if (spec.tile(c) == Tile::LowPenalty) out += "hh";
            else out += "__";
            out += '|';
        }
        out += fmt::format(" {}\n", y);
    }
    out += ' ';
    for (int x = 0; x < spec.width; ++x) out += fmt::format("{:<3}", x);
    while (!out.empty() && out.back() == ' ') out.pop_back();
    out += '\n';
    return out;
}

Cell maze_move(const MazeSpec& spec, Cell from, MazeAction a) {
    Cell to = from;
    switch (a) {
        case MazeAction::Up: ++to.row; break;
        case MazeAction::Down: --to.row; break;
        case MazeAction::Left: --to.col; break;
        case MazeAction::Right: ++to.col; break;
    }
    return spec.contains(to) ? to : from;
}

TabularMomdp maze_to_momdp(const MazeSpec& spec, double gamma) {
    spec.validate();
    const auto n = static_cast<std::size_t>(spec.width * spec.height);
    MomdpBuilder b(n, kMazeActions, 2);
    b.gamma(gamma).initial(spec.state(spec.start)).terminal(spec.state(spec.goal));
    for (StateId s = 0; s < n; ++s) {
        if (s == spec.state(spec.goal)) continue;
        for (ActionId a = 0; a < kMazeActions; ++a) {
            const Cell to = maze_move(spec, spec.cell(s), static_cast<MazeAction>(a));
            const bool at_goal = to == spec.goal;
            ValueVector r(2);
            if (spec.scheme == ObjectiveScheme::EndpointPrimary) {
                r << (at_goal ? spec.goal_reward : 0.0), spec.penalty(to);
            } else {
                r << spec.penalty(to) + (at_goal ? spec.goal_reward : 0.0), (at_goal ? 0.0 : -1.0);
            }
            b.transition(s, a, spec.state(to), 1.0, r);
        }
    }
    return b.build();
}

const std::map<std::string, std::string>& builtin_maze_texts() {
    static const std::map<std::string, std::string> texts = {
        {"maze-small", R"(
      __________
      |__|G_|__| 2
      |HH|HH|__| 1
      |__|S_|__| 0
       0  1  2
)"},
        {"maze-extended", R"(
 _____________
 |__|G_|__|__| 4
 |__|hh|hh|hh| 3
 |__|__|__|__| 2
 |HH|HH|HH|__| 1
 |S_|__|__|__| 0
  0  1  2  3
)"},
        {"maze-early-and-late", R"(
         MAZE
      __________
      |__|G_|__| 10
      |HH|HH|__| 9
      |__|__|__| 8
      |__|hh|hh| 7
      |__|__|__| 6
       __|__|__  5
      |__|__|__| 4
      |__|hh|hh| 3
      |__|__|__| 2
      |HH|HH|__| 1
      |__|S_|__| 0
       0  1  2
)"},
        {"maze-concave-simple", R"(
          MAZE
       __________
       |__|G_|__| 4
       |__|hh|hh| 3
       |__|__|__| 2
       |HH|HH|__| 1
       |S_|__|__| 0
        0  1  2
)"},
    };
    return texts;
}

std::map<std::string, MazeSpec> builtin_mazes() {
    std::map<std::string, MazeSpec> out;
    for (const auto& [name, text] : builtin_maze_texts()) out.emplace(name, parse_maze(text));
    return out;
}

MazeSpec builtin_maze(const std::string& name) {
    const auto& texts = builtin_maze_texts();
    const auto it = texts.find(name);
    if (it == texts.end()) throw ContractError("unknown built-in maze '" + name + "'");
    return parse_maze(it->second);
}

std::string to_string(ObjectiveScheme s) {
    return s == ObjectiveScheme::EndpointPrimary ? "endpoint" : "path";
}

ObjectiveScheme objective_scheme_from_string(const std::string& s) {
    if (s == "endpoint") return ObjectiveScheme::EndpointPrimary;
    if (s == "path") return ObjectiveScheme::PathPenaltyPrimary;
    throw ContractError("unknown objective scheme '" + s + "' (expected endpoint or path)");
}

}  // namespace tlo
