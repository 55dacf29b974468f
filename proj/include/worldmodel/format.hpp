#pragma once

#include "worldmodel/model.hpp"
#include "worldmodel/trajectory.hpp"

#include <string>
#include <string_view>

namespace wm {

// Line-oriented model documents:
//
//   model <kind>
//   obs <sym>...
//   act <sym>...            (event <sym>... for ed models)
//   meta <key> <value>
//   state <id> [initial] [memory] [phenomenon=<name>]... [trace <obs>=<p|[lo,hi]>...]
//   arrow <from> <label> <to> [lp=<p|[lo,hi]>] [ap=<p|[lo,hi]>]
//   priority <event> <rank>
//   # comment
//
// Errors are wm::Error("parse", "line N: ...").

/// Parses a model document. Kind-specific rules are not checked here (see
/// validate); structural problems are.
Model parse_model(std::string_view text);

/// Canonical text: states sorted by id, arrows by (from, label, to), point
/// intervals printed as a bare number.
std::string serialize_model(const Model& model);

/// Graphviz rendering, one colour per label.
std::string export_dot(const Model& model);

/// `t0 <index>` header (defaults to the number of steps), optional `obs`/`act`
/// alphabet headers, then one `<obs> <act>` line per step. When `model` is
/// given, symbols are also resolved against it.
Trajectory parse_trajectory(std::string_view text, const Model* model = nullptr);

std::string serialize_trajectory(const Trajectory& trajectory);

/// Splits on whitespace.
std::vector<std::string_view> tokenize(std::string_view line);

/// Reads `path`, or standard input when `path` is "-".
std::string read_text_file(const std::string& path);

} // namespace wm
