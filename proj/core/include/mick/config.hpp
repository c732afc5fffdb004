#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "mick/trainer.hpp"

namespace mick {

using KeyValues = std::map<std::string, std::string>;

/// "key = value" per line; '#' starts a comment; blank lines ignored.
KeyValues parse_key_values(std::string_view text);
KeyValues load_key_values(const std::filesystem::path& path);

/// Applies typed keys onto `cfg`. Keys are the TrainConfig field names plus
/// the encoder dimensions (max_length, word_dim, pos_dim, hidden_dim,
/// window), and "episodes", which splits a total evenly over the three
/// phases (explicit phaseN keys win). Unknown keys and unparsable values
/// throw ValidationError.
void apply_key_values(TrainConfig& cfg, const KeyValues& kv);

TrainConfig config_from_key_values(const KeyValues& kv);

/// Every key with its effective value, one "key = value" per line, sorted.
std::string format_config(const TrainConfig& cfg);
KeyValues config_to_key_values(const TrainConfig& cfg);

}  // namespace mick
