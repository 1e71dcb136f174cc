#pragma once

#include <map>
#include <string>
#include <vector>

#include "escape4d/engine.hpp"

namespace escape4d {

struct DecodeResult {
    bool ok = false;
    ActionRequest action;      // valid when ok
    std::string raw;           // original text, kept for error reporting
    std::string error;         // parse failure reason
    std::vector<std::string> warnings;  // e.g. unknown fields ignored
};

/// Parses an action JSON payload using the wire schema field names
/// (move_forward, rotate_right, rotate_down, jump, look_at, grab, trigger,
/// interactions{use_item_id, input}, read, rationale). Missing optional
/// fields default to no-ops; numerics are clamped; unknown fields are
/// ignored with a warning. Non-parsable text yields ok=false.
DecodeResult decode_action(const std::string& text);

/// Deterministic field ordering; round-trips through decode_observation.
std::string encode_observation(const Observation& obs);
Observation decode_observation(const std::string& text);

std::string encode_action(const ActionRequest& action);

// Episode-log persistence: one header line plus one JSONL record per step
// (docs/log_schema.md). write/read round-trips bitwise on re-serialization.
std::string log_to_jsonl(const TrajectoryLog& log);
TrajectoryLog log_from_jsonl(const std::string& text);
void save_log(const TrajectoryLog& log, const std::string& path);
TrajectoryLog load_log(const std::string& path);

// Prompt templates for external LLM harnesses. Placeholders in braces,
// e.g. {interaction_result}; substitution of an unknown placeholder or a
// missing value throws std::runtime_error.
std::string system_prompt_template();
std::string step_prompt_template();
std::string consistency_prompt_template();

std::string render_template(const std::string& tmpl,
                            const std::map<std::string, std::string>& values);

std::string render_system_prompt();
std::string render_step_prompt(const Observation& obs);
std::string render_consistency_prompt(const std::string& rationale, const std::string& response);

}  // namespace escape4d
